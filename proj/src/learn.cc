// Copyright 2026 The Pommer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pommer/learn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "pommer/errors.h"

namespace pommer {
namespace {

using json = nlohmann::json;

float Clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

// Plane index for a board code; -1 for fog and unlisted codes.
int BoardPlane(int code, int self_code, const Observation& obs) {
  if (code >= 0 && code <= 4) return code;
  if (IsPowerUpCode(code)) return code - 1;
  if (!IsAgentCode(code)) return -1;
  if (code == self_code) return kSelfPlane;
  for (int e = 0; e < 3; ++e) {
    if (obs.enemies[e] == code) return 9 + e;
  }
  return -1;
}

int SelfCode(const Observation& obs) {
  const int n = obs.BoardSize();
  const int code = obs.board[obs.position[0] * n + obs.position[1]];
  if (IsAgentCode(code)) return code;
  // Dead observers are not on the board; the missing enemy code is them.
  for (int c = AgentCode(0); c <= AgentCode(3); ++c) {
    if (std::find(obs.enemies.begin(), obs.enemies.end(), c) == obs.enemies.end() &&
        c != obs.teammate) {
      return c;
    }
  }
  return -1;
}

// Shared TD (+ margin) update. `expert_mask[b]` adds the margin term.
double TdUpdate(QLearner& learner, std::span<const Transition* const> batch,
                std::span<const uint8_t> expert_mask) {
  const TrainConfig& cfg = learner.config;
  const int b = static_cast<int>(batch.size());
  const Shape& in_shape = learner.online.input_shape();
  const size_t stride = ShapeCount(in_shape);
  Shape shape = in_shape;
  shape.insert(shape.begin(), b);
  Tensor x(shape), next(shape);
  for (int i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    if (t.features.size() != stride) throw ShapeError("transition features size");
    std::copy(t.features.begin(), t.features.end(), x.data() + i * stride);
    if (!t.terminal) {
      if (t.next_features.size() != stride) {
        throw ShapeError("transition next_features size");
      }
      std::copy(t.next_features.begin(), t.next_features.end(),
                next.data() + i * stride);
    }
  }
  const Tensor q_next = learner.target.Predict(next);
  const Tensor q = learner.online.Forward(x);
  const int k = q.dim(1);
  Tensor grad(q.shape());
  double loss = 0.0;
  const double inv_b = 1.0 / b;
  for (int i = 0; i < b; ++i) {
    const Transition& t = *batch[i];
    const int a = static_cast<int>(t.action);
    if (a < 0 || a >= k) throw std::out_of_range("transition action");
    double y = t.reward;
    if (!t.terminal) {
      const double* row = q_next.data() + i * k;
      y += cfg.gamma * *std::max_element(row, row + k);
    }
    const double diff = q[i * k + a] - y;
    loss += Huber(diff, cfg.huber_delta) * inv_b;
    grad[i * k + a] += HuberGrad(diff, cfg.huber_delta) * inv_b;
    if (!expert_mask.empty() && expert_mask[i]) {
      const MarginLossResult m = MarginLoss(
          std::span<const double>(q.data() + i * k, k), a, cfg.dqfd_margin);
      loss += cfg.margin_weight * m.value * inv_b;
      for (int j = 0; j < k; ++j) {
        grad[i * k + j] += cfg.margin_weight * m.grad[j] * inv_b;
      }
    }
  }
  learner.online.ZeroGrad();
  learner.online.Backward(grad);
  learner.optimizer.Step(learner.online);
  ++learner.updates;
  if (learner.updates % cfg.target_update_period == 0) learner.SyncTarget();
  return loss;
}

std::vector<float> FeaturizeState(const GameState& state, int agent_id) {
  return Featurize(Observe(state, agent_id), state.config.bomb_life);
}

std::unique_ptr<Agent> MakeSimple(const GameConfig& game, uint64_t episode_seed,
                                  int seat) {
  auto agent = std::make_unique<SimpleAgent>(AgentRules::From(game));
  agent->Reset(MixSeed(episode_seed, 100 + seat));
  return agent;
}

}  // namespace

// ---------------------------------------------------------------- features

Shape FeatureShape(int board_size) {
  return {kFeaturePlanes, board_size, board_size};
}

void FeaturizeInto(const Observation& obs, int bomb_life, std::span<float> out) {
  const int n = obs.BoardSize();
  const size_t plane = static_cast<size_t>(n) * n;
  if (out.size() != kFeaturePlanes * plane) {
    throw ShapeError("feature buffer holds " + std::to_string(out.size()) +
                     " values, expected " + std::to_string(kFeaturePlanes * plane));
  }
  std::fill(out.begin(), out.end(), 0.0f);
  const int self_code = SelfCode(obs);
  const double life_norm = bomb_life > 0 ? bomb_life : 1;
  for (size_t i = 0; i < plane; ++i) {
    const int code = obs.board[i];
    const int p = BoardPlane(code, self_code, obs);
    if (p >= 0) out[p * plane + i] = 1.0f;
    if (code == ItemCode(Item::kFog)) continue;
    out[kBoardPlanes * plane + i] = Clamp01(obs.bomb_life[i] / life_norm);
    out[(kBoardPlanes + 1) * plane + i] =
        Clamp01(static_cast<double>(obs.bomb_blast_strength[i]) / n);
  }
  const float scalars[3] = {Clamp01(static_cast<double>(obs.ammo) / n),
                            Clamp01(static_cast<double>(obs.blast_strength) / n),
                            obs.can_kick ? 1.0f : 0.0f};
  for (int s = 0; s < 3; ++s) {
    auto first = out.begin() + (kBoardPlanes + 2 + s) * plane;
    std::fill(first, first + plane, scalars[s]);
  }
}

std::vector<float> Featurize(const Observation& obs, int bomb_life) {
  const int n = obs.BoardSize();
  std::vector<float> out(static_cast<size_t>(kFeaturePlanes) * n * n);
  FeaturizeInto(obs, bomb_life, out);
  return out;
}

namespace {

// Where cell (r, c) lands under `symmetry`.
Position MapCell(int symmetry, int n, Position p) {
  if (symmetry & 1) std::swap(p.row, p.col);
  if (symmetry & 2) p.row = n - 1 - p.row;
  if (symmetry & 4) p.col = n - 1 - p.col;
  return p;
}

}  // namespace

void ApplySymmetry(int symmetry, int board_size, std::span<float> features) {
  const int n = board_size;
  const size_t cells = static_cast<size_t>(n) * n;
  if (symmetry < 0 || symmetry >= kNumSymmetries) {
    throw std::out_of_range("symmetry must be in [0, 8)");
  }
  if (features.size() != kFeaturePlanes * cells) {
    throw ShapeError("feature buffer size " + std::to_string(features.size()));
  }
  if (symmetry == 0) return;
  std::vector<float> plane(cells);
  for (int c = 0; c < kFeaturePlanes; ++c) {
    float* src = features.data() + c * cells;
    for (int r = 0; r < n; ++r) {
      for (int col = 0; col < n; ++col) {
        const Position to = MapCell(symmetry, n, {r, col});
        plane[to.row * n + to.col] = src[r * n + col];
      }
    }
    std::copy(plane.begin(), plane.end(), src);
  }
}

Action ApplySymmetry(int symmetry, Action action) {
  if (!IsMove(action)) return action;
  // Map the unit step through the cell map on a 3x3 board centred at (1,1).
  const Position to = MapCell(symmetry, 3, Moved({1, 1}, action));
  for (Action a : {Action::kUp, Action::kLeft, Action::kDown, Action::kRight}) {
    if (Moved({1, 1}, a) == to) return a;
  }
  return action;
}

Tensor StackFeatures(const Shape& shape,
                     std::span<const std::vector<float>* const> rows) {
  const size_t stride = ShapeCount(shape);
  Shape full = shape;
  full.insert(full.begin(), static_cast<int>(rows.size()));
  Tensor t(full);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->size() != stride) throw ShapeError("feature row size mismatch");
    std::copy(rows[i]->begin(), rows[i]->end(), t.data() + i * stride);
  }
  return t;
}

// ------------------------------------------------------------- replay

ReplayBuffer::ReplayBuffer(size_t capacity, Eviction eviction)
    : capacity_(capacity), eviction_(eviction) {
  if (capacity == 0) throw InvalidConfig("replay capacity must be positive");
}

void ReplayBuffer::Add(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  if (eviction_ == Eviction::kNever) {
    throw ContractViolation("replay buffer full and eviction disabled");
  }
  items_[next_] = std::move(t);
  next_ = (next_ + 1) % capacity_;
}

size_t ReplayBuffer::SampleIndex(Rng& rng) const {
  if (items_.empty()) throw ContractViolation("sampling from an empty buffer");
  return rng.UniformInt(static_cast<uint64_t>(items_.size()));
}

// ------------------------------------------------------------- training

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidConfig(what);
  };
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must be in [0, 1]");
  require(learning_rate >= 0.0, "learning_rate must be non-negative");
  require(batch_size >= 1, "batch_size must be positive");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0,
          "epsilon_start must be in [0, 1]");
  require(epsilon_end >= 0.0 && epsilon_end <= 1.0, "epsilon_end must be in [0, 1]");
  require(epsilon_decay_steps >= 0, "epsilon_decay_steps must be non-negative");
  require(target_update_period >= 1, "target_update_period must be positive");
  require(dqfd_margin >= 0.0, "dqfd_margin must be non-negative");
  require(margin_weight >= 0.0, "margin_weight must be non-negative");
  require(expert_fraction >= 0.0 && expert_fraction <= 1.0,
          "expert_fraction must be in [0, 1]");
  require(pretrain_steps >= 0, "pretrain_steps must be non-negative");
  require(huber_delta > 0.0, "huber_delta must be positive");
  require(replay_capacity >= 1, "replay_capacity must be positive");
  require(learning_starts >= 0, "learning_starts must be non-negative");
  require(train_every >= 1, "train_every must be positive");
}

std::vector<LayerSpec> ReferenceSpecs(int conv_filters, int dense_units) {
  return {LayerSpec::Conv2D(conv_filters, 3, 1, 1),
          LayerSpec::ReLU(),
          LayerSpec::Conv2D(conv_filters, 3, 1, 1),
          LayerSpec::ReLU(),
          LayerSpec::Flatten(),
          LayerSpec::Dense(dense_units),
          LayerSpec::ReLU(),
          LayerSpec::Dense(kNumActions)};
}

Network MakePolicyNetwork(int board_size, uint64_t seed, int conv_filters,
                          int dense_units) {
  std::vector<LayerSpec> specs = {LayerSpec::Recenter(kSelfPlane, board_size)};
  for (const LayerSpec& s : ReferenceSpecs(conv_filters, dense_units)) specs.push_back(s);
  return Network(FeatureShape(board_size), std::move(specs), seed);
}

int Argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty range");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double EpsilonAt(const TrainConfig& cfg, int64_t step) {
  if (step >= cfg.epsilon_decay_steps) return cfg.epsilon_end;
  const double frac =
      static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

Action EpsilonGreedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.Bernoulli(epsilon)) {
    return static_cast<Action>(rng.UniformInt(static_cast<uint64_t>(q.size())));
  }
  return static_cast<Action>(Argmax(q));
}

double BellmanTarget(const Transition& t, const Network& target_net, double gamma) {
  if (t.terminal) return t.reward;
  Shape shape = target_net.input_shape();
  shape.insert(shape.begin(), 1);
  const Tensor q =
      target_net.Predict(Tensor(shape, std::vector<double>(t.next_features.begin(),
                                                           t.next_features.end())));
  return t.reward + gamma * *std::max_element(q.values().begin(), q.values().end());
}

MarginLossResult MarginLoss(std::span<const double> q, int expert_action,
                            double margin) {
  const int k = static_cast<int>(q.size());
  if (expert_action < 0 || expert_action >= k) {
    throw std::out_of_range("expert action " + std::to_string(expert_action));
  }
  int best = expert_action;
  double best_value = q[expert_action];
  for (int a = 0; a < k; ++a) {
    if (a == expert_action) continue;
    const double v = q[a] + margin;
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  MarginLossResult r;
  r.grad.assign(k, 0.0);
  if (best == expert_action) return r;
  r.value = best_value - q[expert_action];
  r.grad[best] = 1.0;
  r.grad[expert_action] = -1.0;
  return r;
}

QLearner::QLearner(Network net, TrainConfig cfg)
    : online(std::move(net)),
      target(online),
      optimizer(OptimizerConfig{OptimizerKind::kAdam, cfg.learning_rate}),
      config(cfg),
      rng(MixSeed(cfg.seed, 7)) {
  config.Validate();
}

double DqnTrainStep(QLearner& learner, const ReplayBuffer& buffer) {
  const int b = learner.config.batch_size;
  if (buffer.size() < static_cast<size_t>(b)) {
    throw ContractViolation("replay buffer holds " + std::to_string(buffer.size()) +
                            " transitions, batch needs " + std::to_string(b));
  }
  std::vector<const Transition*> batch(b);
  for (auto& t : batch) t = &buffer.at(buffer.SampleIndex(learner.rng));
  return TdUpdate(learner, batch, {});
}

std::vector<double> DqfdPretrain(QLearner& learner, const ReplayBuffer& expert) {
  if (expert.empty()) throw ContractViolation("expert buffer is empty");
  const int b = learner.config.batch_size;
  std::vector<double> trace;
  trace.reserve(learner.config.pretrain_steps);
  std::vector<const Transition*> batch(b);
  const std::vector<uint8_t> all(b, 1);
  for (int64_t s = 0; s < learner.config.pretrain_steps; ++s) {
    for (auto& t : batch) t = &expert.at(expert.SampleIndex(learner.rng));
    trace.push_back(TdUpdate(learner, batch, all));
  }
  return trace;
}

DqfdStepResult DqfdTrainStep(QLearner& learner, const ReplayBuffer& expert,
                             const ReplayBuffer& self) {
  const TrainConfig& cfg = learner.config;
  const int b = cfg.batch_size;
  const double f = cfg.expert_fraction;
  const auto expert_share = static_cast<size_t>(std::ceil(f * b));
  const auto self_share = static_cast<size_t>(std::ceil((1.0 - f) * b));
  if (f > 0.0 && expert.size() < std::max<size_t>(1, expert_share)) {
    throw ContractViolation("expert buffer underflow");
  }
  if (f < 1.0 && self.size() < std::max<size_t>(1, self_share)) {
    throw ContractViolation("self buffer underflow");
  }
  std::vector<const Transition*> batch(b);
  std::vector<uint8_t> mask(b, 0);
  DqfdStepResult result;
  for (int i = 0; i < b; ++i) {
    bool from_expert;
    if (f <= 0.0) {
      from_expert = false;
    } else if (f >= 1.0) {
      from_expert = true;
    } else {
      from_expert = learner.rng.Bernoulli(f);
    }
    const ReplayBuffer& src = from_expert ? expert : self;
    batch[i] = &src.at(src.SampleIndex(learner.rng));
    mask[i] = from_expert;
    result.expert_samples += from_expert;
  }
  result.loss = TdUpdate(learner, batch, mask);
  return result;
}

double BcTrainStep(Network& net, Optimizer& opt, const Tensor& features,
                   std::span<const int> labels) {
  const Tensor logits = net.Forward(features);
  const LossResult loss = CrossEntropyLoss(logits, labels);
  net.ZeroGrad();
  net.Backward(loss.grad);
  opt.Step(net);
  return loss.value;
}

// ------------------------------------------------------------- policies

void CheckPolicyNetwork(const Network& net, int board_size) {
  if (net.num_layers() == 0) throw IncompatibleModel("model has no layers");
  if (net.input_shape() != FeatureShape(board_size)) {
    throw IncompatibleModel("model input " + ShapeString(net.input_shape()) +
                            " does not match features " +
                            ShapeString(FeatureShape(board_size)));
  }
  if (net.output_shape() != Shape{kNumActions}) {
    throw IncompatibleModel("model output " + ShapeString(net.output_shape()) +
                            " is not [6]");
  }
}

GreedyPolicyAgent::GreedyPolicyAgent(std::shared_ptr<const Network> net,
                                     int board_size, int bomb_life, std::string name)
    : net_(std::move(net)),
      board_size_(board_size),
      bomb_life_(bomb_life),
      name_(std::move(name)) {
  if (!net_) throw IncompatibleModel("null model");
  CheckPolicyNetwork(*net_, board_size_);
}

std::vector<double> GreedyPolicyAgent::Scores(const Observation& obs) const {
  if (obs.BoardSize() != board_size_) {
    throw IncompatibleModel("observation board size " +
                            std::to_string(obs.BoardSize()) + " does not match model");
  }
  const std::vector<float> f = Featurize(obs, bomb_life_);
  Shape shape = FeatureShape(board_size_);
  shape.insert(shape.begin(), 1);
  return net_->Predict(Tensor(shape, std::vector<double>(f.begin(), f.end())))
      .values();
}

Action GreedyPolicyAgent::Act(const Observation& obs) {
  return static_cast<Action>(Argmax(Scores(obs)));
}

std::unique_ptr<Agent> GreedyPolicyAgent::Clone() const {
  return std::make_unique<GreedyPolicyAgent>(net_, board_size_, bomb_life_, name_);
}

// ------------------------------------------------------------- datasets

std::string DemoRecordToJson(const DemoRecord& r) {
  const Observation& o = r.obs;
  json obs = {{"board", o.board},
              {"position", o.position},
              {"ammo", o.ammo},
              {"blast_strength", o.blast_strength},
              {"can_kick", o.can_kick},
              {"enemies", o.enemies},
              {"bomb_blast_strength", o.bomb_blast_strength},
              {"bomb_life", o.bomb_life},
              {"message", o.message}};
  json j = {{"episode", r.episode},
            {"step", r.step},
            {"agent_id", r.agent_id},
            {"obs", std::move(obs)},
            {"action", static_cast<int>(r.action)}};
  return j.dump();
}

DemoRecord DemoRecordFromJson(const std::string& line) {
  DemoRecord r;
  try {
    const json j = json::parse(line);
    r.episode = j.at("episode").get<int>();
    r.step = j.at("step").get<int>();
    r.agent_id = j.at("agent_id").get<int>();
    const json& o = j.at("obs");
    r.obs.board = o.at("board").get<std::vector<int>>();
    r.obs.position = o.at("position").get<std::array<int, 2>>();
    r.obs.ammo = o.at("ammo").get<int>();
    r.obs.blast_strength = o.at("blast_strength").get<int>();
    r.obs.can_kick = o.at("can_kick").get<int>();
    r.obs.enemies = o.at("enemies").get<std::array<int, 3>>();
    r.obs.bomb_blast_strength = o.at("bomb_blast_strength").get<std::vector<int>>();
    r.obs.bomb_life = o.at("bomb_life").get<std::vector<int>>();
    r.obs.message = o.at("message").get<std::array<int, 2>>();
    r.obs.step = r.step;
    const int action = j.at("action").get<int>();
    const auto a = ActionFromInt(action);
    if (!a) throw CorruptFile("action out of range: " + std::to_string(action));
    r.action = *a;
  } catch (const json::exception& e) {
    throw CorruptFile(std::string("malformed demonstration record: ") + e.what());
  }
  const size_t cells = r.obs.board.size();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cells))));
  if (cells == 0 || static_cast<size_t>(n) * n != cells ||
      r.obs.bomb_life.size() != cells || r.obs.bomb_blast_strength.size() != cells) {
    throw CorruptFile("demonstration grids have inconsistent sizes");
  }
  if (r.agent_id < 0 || r.agent_id >= kNumAgents) {
    throw CorruptFile("agent_id out of range");
  }
  return r;
}

struct JsonlDemoSink::Impl {
  std::string path;
  std::ofstream out;
};

JsonlDemoSink::JsonlDemoSink(const std::string& path) : impl_(new Impl{path, {}}) {
  impl_->out.open(path, std::ios::out | std::ios::trunc);
  if (!impl_->out) throw FileError("cannot open " + path + " for writing");
}

JsonlDemoSink::~JsonlDemoSink() = default;

void JsonlDemoSink::Write(const DemoRecord& record) {
  impl_->out << DemoRecordToJson(record) << '\n';
  if (!impl_->out) throw FileError("write failed: " + impl_->path);
}

void JsonlDemoSink::Flush() {
  impl_->out.flush();
  if (!impl_->out) throw FileError("flush failed: " + impl_->path);
}

int64_t ReadDemonstrations(const std::string& path, DemoSink& sink) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  int64_t count = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    DemoRecord record;
    try {
      record = DemoRecordFromJson(line);
    } catch (const CorruptFile& e) {
      throw CorruptFile(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    sink.Write(record);
    ++count;
  }
  return count;
}

std::vector<DemoRecord> ReadDemonstrations(const std::string& path) {
  struct Collect : DemoSink {
    std::vector<DemoRecord> records;
    void Write(const DemoRecord& r) override { records.push_back(r); }
  } collect;
  ReadDemonstrations(path, collect);
  return std::move(collect.records);
}

namespace {
// Per-record scalar bytes after the three grids.
constexpr size_t kDemoScalars = 12;

int8_t Pack(int v) { return static_cast<int8_t>(std::clamp(v, -128, 127)); }
}  // namespace

DemoStore::DemoStore(int board_size)
    : n_(board_size),
      stride_(3 * static_cast<size_t>(board_size) * board_size + kDemoScalars) {
  if (board_size <= 0) throw InvalidConfig("board size must be positive");
}

void DemoStore::Write(const DemoRecord& r) {
  const size_t cells = static_cast<size_t>(n_) * n_;
  if (r.obs.board.size() != cells) {
    throw ShapeError("record board does not match store size " + std::to_string(n_));
  }
  const size_t base = packed_.size();
  packed_.resize(base + stride_);
  int8_t* p = packed_.data() + base;
  for (size_t i = 0; i < cells; ++i) {
    p[i] = Pack(r.obs.board[i]);
    p[cells + i] = Pack(r.obs.bomb_blast_strength[i]);
    p[2 * cells + i] = Pack(r.obs.bomb_life[i]);
  }
  int8_t* s = p + 3 * cells;
  const Observation& o = r.obs;
  const int scalars[kDemoScalars] = {o.position[0], o.position[1], o.ammo,
                                     o.blast_strength, o.can_kick, o.teammate,
                                     o.enemies[0], o.enemies[1], o.enemies[2],
                                     o.message[0], o.message[1], r.agent_id};
  for (size_t i = 0; i < kDemoScalars; ++i) s[i] = Pack(scalars[i]);
  actions_.push_back(r.action);
  episodes_.push_back(r.episode);
  steps_.push_back(r.step);
}

Observation DemoStore::observation(size_t i) const {
  const size_t cells = static_cast<size_t>(n_) * n_;
  const int8_t* p = packed_.data() + i * stride_;
  Observation o;
  o.board.assign(p, p + cells);
  o.bomb_blast_strength.assign(p + cells, p + 2 * cells);
  o.bomb_life.assign(p + 2 * cells, p + 3 * cells);
  const int8_t* s = p + 3 * cells;
  o.position = {s[0], s[1]};
  o.ammo = s[2];
  o.blast_strength = s[3];
  o.can_kick = s[4];
  o.teammate = s[5];
  o.enemies = {s[6], s[7], s[8]};
  o.message = {s[9], s[10]};
  o.step = steps_[i];
  return o;
}

void DemoStore::FeaturizeInto(size_t i, int bomb_life, std::span<float> out) const {
  pommer::FeaturizeInto(observation(i), bomb_life, out);
}

DemoSummary CollectDemonstrations(const GameConfig& game, int n_episodes,
                                  uint64_t seed, DemoSink& sink) {
  if (n_episodes < 0) throw InvalidConfig("n_episodes must be non-negative");
  game.Validate();
  DemoSummary summary;
  for (int ep = 0; ep < n_episodes; ++ep) {
    GameConfig cfg = game;
    cfg.seed = MixSeed(seed, ep);
    GameState state = NewGame(cfg);
    std::array<std::unique_ptr<Agent>, kNumAgents> agents;
    for (int i = 0; i < kNumAgents; ++i) agents[i] = MakeSimple(cfg, cfg.seed, i);
    StepResult res;
    while (!state.done) {
      std::array<Action, kNumAgents> actions{};
      for (int i = 0; i < kNumAgents; ++i) {
        if (!state.agents[i].alive) continue;
        DemoRecord rec;
        rec.episode = ep;
        rec.step = state.step;
        rec.agent_id = i;
        rec.obs = Observe(state, i);
        rec.action = agents[i]->Act(rec.obs);
        actions[i] = rec.action;
        sink.Write(rec);
        ++summary.records;
        ++summary.action_counts[static_cast<int>(rec.action)];
      }
      res = Step(state, actions);
    }
    ++summary.episodes;
    if (state.winner) {
      ++summary.wins[*state.winner];
    } else {
      ++summary.draws;
    }
  }
  return summary;
}

namespace {

void FillBatch(const DemoStore& data, std::span<const size_t> idx, int bomb_life,
               Tensor& x, std::vector<float>& scratch) {
  const size_t stride = ShapeCount(FeatureShape(data.board_size()));
  scratch.resize(stride);
  for (size_t b = 0; b < idx.size(); ++b) {
    data.FeaturizeInto(idx[b], bomb_life, scratch);
    std::copy(scratch.begin(), scratch.end(), x.data() + b * stride);
  }
}

Shape BatchShape(int n, size_t batch) {
  Shape s = FeatureShape(n);
  s.insert(s.begin(), static_cast<int>(batch));
  return s;
}

}  // namespace

double PolicyAccuracy(const Network& net, const DemoStore& data,
                      std::span<const size_t> indices, int bomb_life) {
  if (indices.empty()) return 0.0;
  constexpr size_t kChunk = 256;
  std::vector<float> scratch;
  size_t correct = 0;
  for (size_t start = 0; start < indices.size(); start += kChunk) {
    const auto idx = indices.subspan(start, std::min(kChunk, indices.size() - start));
    Tensor x(BatchShape(data.board_size(), idx.size()));
    FillBatch(data, idx, bomb_life, x, scratch);
    const Tensor out = net.Predict(x);
    const int k = out.dim(1);
    for (size_t b = 0; b < idx.size(); ++b) {
      const int pred =
          Argmax(std::span<const double>(out.data() + b * k, static_cast<size_t>(k)));
      correct += pred == static_cast<int>(data.action(idx[b]));
    }
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double MajorityBaseline(const DemoStore& data, std::span<const size_t> indices) {
  if (indices.empty()) return 0.0;
  std::array<size_t, kNumActions> counts{};
  for (size_t i : indices) ++counts[static_cast<int>(data.action(i))];
  return static_cast<double>(*std::max_element(counts.begin(), counts.end())) /
         static_cast<double>(indices.size());
}

void SplitByEpisode(const DemoStore& data, int k, std::vector<size_t>* train,
                    std::vector<size_t>* held_out) {
  if (k < 2) throw InvalidConfig("split needs k >= 2");
  train->clear();
  held_out->clear();
  for (size_t i = 0; i < data.size(); ++i) {
    (data.episode(i) % k == k - 1 ? held_out : train)->push_back(i);
  }
}

BcReport TrainBehaviorCloning(Network& net, Optimizer& opt, const DemoStore& data,
                              std::span<const size_t> train,
                              std::span<const size_t> held_out, int epochs,
                              int batch_size, int bomb_life, bool augment, Rng& rng,
                              const std::function<void(int, double)>& on_epoch) {
  if (batch_size < 1) throw InvalidConfig("batch_size must be positive");
  BcReport report;
  std::vector<size_t> order(train.begin(), train.end());
  std::vector<float> scratch;
  std::vector<int> labels;
  for (int e = 0; e < epochs && !order.empty(); ++e) {
    rng.Shuffle(std::span<size_t>(order));
    double total = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += batch_size) {
      const auto idx = std::span<const size_t>(order).subspan(
          start, std::min<size_t>(batch_size, order.size() - start));
      Tensor x(BatchShape(data.board_size(), idx.size()));
      FillBatch(data, idx, bomb_life, x, scratch);
      labels.resize(idx.size());
      const size_t stride = x.size() / idx.size();
      for (size_t b = 0; b < idx.size(); ++b) {
        Action a = data.action(idx[b]);
        if (augment) {
          const int sym = rng.UniformInt(kNumSymmetries);
          std::span<float> row(scratch.data(), stride);
          data.FeaturizeInto(idx[b], bomb_life, row);
          ApplySymmetry(sym, data.board_size(), row);
          std::copy(row.begin(), row.end(), x.data() + b * stride);
          a = ApplySymmetry(sym, a);
        }
        labels[b] = static_cast<int>(a);
      }
      total += BcTrainStep(net, opt, x, labels);
      ++batches;
    }
    report.epoch_loss.push_back(total / static_cast<double>(batches));
    if (on_epoch) on_epoch(e, report.epoch_loss.back());
  }
  // Training accuracy on an evenly strided sample keeps the report cheap.
  constexpr size_t kAccuracySample = 20000;
  std::vector<size_t> sample;
  const size_t stride = std::max<size_t>(1, train.size() / kAccuracySample);
  for (size_t i = 0; i < train.size(); i += stride) sample.push_back(train[i]);
  report.train_accuracy = PolicyAccuracy(net, data, sample, bomb_life);
  report.held_out_accuracy = PolicyAccuracy(net, data, held_out, bomb_life);
  report.majority_baseline = MajorityBaseline(data, held_out);
  return report;
}

// ------------------------------------------------------------- game RL

int64_t CollectExpertTransitions(const GameConfig& game, int n_episodes,
                                 uint64_t seed, ReplayBuffer& out) {
  if (n_episodes < 0) throw InvalidConfig("n_episodes must be non-negative");
  game.Validate();
  int64_t added = 0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    GameConfig cfg = game;
    cfg.seed = MixSeed(seed, ep);
    GameState state = NewGame(cfg);
    std::array<std::unique_ptr<Agent>, kNumAgents> agents;
    for (int i = 0; i < kNumAgents; ++i) agents[i] = MakeSimple(cfg, cfg.seed, i);
    while (!state.done) {
      std::array<Action, kNumAgents> actions{};
      std::array<std::vector<float>, kNumAgents> before;
      std::array<bool, kNumAgents> acting{};
      for (int i = 0; i < kNumAgents; ++i) {
        if (!state.agents[i].alive) continue;
        const Observation obs = Observe(state, i);
        before[i] = Featurize(obs, cfg.bomb_life);
        actions[i] = agents[i]->Act(obs);
        acting[i] = true;
      }
      const StepResult res = Step(state, actions);
      for (int i = 0; i < kNumAgents; ++i) {
        if (!acting[i]) continue;
        if (out.size() >= out.capacity()) return added;
        Transition t;
        t.features = std::move(before[i]);
        t.action = actions[i];
        t.terminal = res.done || !state.agents[i].alive;
        t.reward = t.terminal ? res.rewards[i] : 0.0;
        if (!t.terminal) t.next_features = FeaturizeState(state, i);
        t.is_expert = true;
        out.Add(std::move(t));
        ++added;
      }
    }
  }
  return added;
}

GameTrainingReport TrainInGame(QLearner& learner, const GameConfig& game,
                               const Agent& opponent, int64_t env_steps,
                               ReplayBuffer& self, const ReplayBuffer* expert,
                               const std::function<void(int64_t, double)>& on_log) {
  game.Validate();
  CheckPolicyNetwork(learner.online, game.board_size);
  const TrainConfig& tc = learner.config;
  GameTrainingReport report;
  Shape one = FeatureShape(game.board_size);
  one.insert(one.begin(), 1);
  while (report.env_steps < env_steps) {
    GameConfig cfg = game;
    cfg.seed = MixSeed(tc.seed, 1000000 + report.episodes);
    GameState state = NewGame(cfg);
    std::array<std::unique_ptr<Agent>, kNumAgents> opponents;
    for (int i = 1; i < kNumAgents; ++i) {
      opponents[i] = opponent.Clone();
      opponents[i]->Reset(MixSeed(cfg.seed, 100 + i));
    }
    std::vector<float> features = FeaturizeState(state, 0);
    double final_reward = 0.0;
    for (;;) {
      const Tensor q = learner.online.Predict(
          Tensor(one, std::vector<double>(features.begin(), features.end())));
      std::array<Action, kNumAgents> actions{};
      actions[0] = EpsilonGreedy(q.values(), EpsilonAt(tc, report.env_steps),
                                 learner.rng);
      for (int i = 1; i < kNumAgents; ++i) {
        if (state.agents[i].alive) actions[i] = opponents[i]->Act(Observe(state, i));
      }
      const StepResult res = Step(state, actions);
      Transition t;
      t.features = features;
      t.action = actions[0];
      t.terminal = res.done || !state.agents[0].alive;
      t.reward = t.terminal ? res.rewards[0] : 0.0;
      if (!t.terminal) {
        features = FeaturizeState(state, 0);
        t.next_features = features;
      }
      final_reward = t.reward;
      const bool terminal = t.terminal;
      self.Add(std::move(t));
      ++report.env_steps;
      const auto ready = static_cast<size_t>(
          std::max<int64_t>(tc.learning_starts, tc.batch_size));
      if (self.size() >= ready && report.env_steps % tc.train_every == 0) {
        const double loss = expert ? DqfdTrainStep(learner, *expert, self).loss
                                   : DqnTrainStep(learner, self);
        report.losses.push_back(loss);
        if (on_log) on_log(report.env_steps, loss);
      }
      if (terminal || report.env_steps >= env_steps) break;
    }
    report.episode_rewards.push_back(static_cast<int>(final_reward));
    ++report.episodes;
  }
  return report;
}

}  // namespace pommer
