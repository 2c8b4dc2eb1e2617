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

// Featurization, replay, and the DQN / DQfD / behavior-cloning trainers.

#ifndef POMMER_LEARN_H_
#define POMMER_LEARN_H_

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pommer/agents.h"
#include "pommer/engine.h"
#include "pommer/nn.h"
#include "pommer/rng.h"

namespace pommer {

// ---------------------------------------------------------------- features

// Planes, in order: passage, rigid, wood, bomb, flames, extra-bomb,
// incr-range, kick, self, enemy 0..2, bomb life, bomb blast, ammo,
// blast strength, can kick.
inline constexpr int kFeaturePlanes = 17;
inline constexpr int kBoardPlanes = 12;
inline constexpr int kSelfPlane = 8;

Shape FeatureShape(int board_size);
// `out` must hold kFeaturePlanes * n * n values. Bomb life is divided by
// `bomb_life`; bomb blast, ammo and blast strength by the board size, all
// clamped to [0, 1]. Fog cells are zero in every board plane.
void FeaturizeInto(const Observation& obs, int bomb_life, std::span<float> out);
std::vector<float> Featurize(const Observation& obs, int bomb_life = 10);

// The eight symmetries of the square board. Bit 0 transposes, bit 1 flips
// rows, bit 2 flips columns, applied in that order. The game rules are
// invariant under each one once moves are mapped the same way.
inline constexpr int kNumSymmetries = 8;
void ApplySymmetry(int symmetry, int board_size, std::span<float> features);
Action ApplySymmetry(int symmetry, Action action);

// Stacks equally sized feature vectors into a [batch] + shape tensor.
Tensor StackFeatures(const Shape& shape,
                     std::span<const std::vector<float>* const> rows);

// ------------------------------------------------------------- replay

struct Transition {
  std::vector<float> features;
  Action action = Action::kStop;
  double reward = 0.0;
  // Ignored when terminal.
  std::vector<float> next_features;
  bool terminal = false;
  bool is_expert = false;
};

class ReplayBuffer {
 public:
  enum class Eviction { kFifo, kNever };

  explicit ReplayBuffer(size_t capacity, Eviction eviction = Eviction::kFifo);

  // FIFO buffers overwrite the oldest entry when full; kNever buffers throw
  // ContractViolation instead.
  void Add(Transition t);
  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Transition& at(size_t i) const { return items_[i]; }
  // Uniform with replacement.
  size_t SampleIndex(Rng& rng) const;

 private:
  size_t capacity_;
  Eviction eviction_;
  size_t next_ = 0;
  std::vector<Transition> items_;
};

// ------------------------------------------------------------- training

struct TrainConfig {
  double gamma = 0.99;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int64_t epsilon_decay_steps = 10000;
  int64_t target_update_period = 1000;
  double dqfd_margin = 0.8;
  double margin_weight = 1.0;
  double expert_fraction = 0.25;
  int64_t pretrain_steps = 1000;
  double huber_delta = 1.0;
  size_t replay_capacity = 20000;
  int64_t learning_starts = 1000;
  int train_every = 4;
  uint64_t seed = 0;

  // Throws InvalidConfig.
  void Validate() const;
};

// Width of the two 3x3 convolutions. The reference width is 256.
inline constexpr int kDefaultConvFilters = 32;

// Conv(f,3x3,same) ReLU Conv(f,3x3,same) ReLU Flatten Dense(128) ReLU
// Dense(6).
std::vector<LayerSpec> ReferenceSpecs(int conv_filters = kDefaultConvFilters,
                                      int dense_units = 128);
// Recenter(kSelfPlane, board_size) followed by ReferenceSpecs: the stack
// sees the board from the agent's cell.
Network MakePolicyNetwork(int board_size, uint64_t seed,
                          int conv_filters = kDefaultConvFilters,
                          int dense_units = 128);

// Index of the largest value; ties go to the lowest index.
int Argmax(std::span<const double> values);

// Linear from epsilon_start to epsilon_end over epsilon_decay_steps.
double EpsilonAt(const TrainConfig& cfg, int64_t step);
Action EpsilonGreedy(std::span<const double> q, double epsilon, Rng& rng);

// r + gamma * max_a' Q_target(s', a') * (1 - terminal)
double BellmanTarget(const Transition& t, const Network& target_net, double gamma);

// max_a [q(a) + margin * 1[a != expert]] - q(expert), and its gradient in q.
struct MarginLossResult {
  double value = 0.0;
  std::vector<double> grad;
};
MarginLossResult MarginLoss(std::span<const double> q, int expert_action,
                            double margin);

// Online network, frozen target copy, optimizer and sampling state.
struct QLearner {
  QLearner(Network net, TrainConfig config);

  Network online;
  Network target;
  Optimizer optimizer;
  TrainConfig config;
  Rng rng;
  int64_t updates = 0;

  // Copies online into target.
  void SyncTarget() { target.CopyParametersFrom(online); }
};

// One uniform minibatch of Huber TD loss. Throws ContractViolation when the
// buffer holds fewer than batch_size transitions.
double DqnTrainStep(QLearner& learner, const ReplayBuffer& buffer);

// pretrain_steps expert-only batches of TD + margin_weight * margin loss.
// Throws ContractViolation on an empty buffer.
std::vector<double> DqfdPretrain(QLearner& learner, const ReplayBuffer& expert);

struct DqfdStepResult {
  double loss = 0.0;
  int expert_samples = 0;
};
// Each batch element comes from the expert buffer with probability
// expert_fraction (TD + margin) and from the self buffer otherwise (TD).
DqfdStepResult DqfdTrainStep(QLearner& learner, const ReplayBuffer& expert,
                             const ReplayBuffer& self);

// Cross-entropy on action labels; one optimizer step.
double BcTrainStep(Network& net, Optimizer& opt, const Tensor& features,
                   std::span<const int> labels);

// ------------------------------------------------------------- policies

// Acts greedily on network outputs. Throws IncompatibleModel if the network
// does not map FeatureShape(board_size) to six outputs.
class GreedyPolicyAgent : public Agent {
 public:
  GreedyPolicyAgent(std::shared_ptr<const Network> net, int board_size = 11,
                    int bomb_life = 10, std::string name = "model");

  Action Act(const Observation& obs) override;
  std::string Name() const override { return name_; }
  std::unique_ptr<Agent> Clone() const override;
  // Raw network output for one observation.
  std::vector<double> Scores(const Observation& obs) const;

 private:
  std::shared_ptr<const Network> net_;
  int board_size_;
  int bomb_life_;
  std::string name_;
};

void CheckPolicyNetwork(const Network& net, int board_size);

// ------------------------------------------------------------- datasets

struct DemoRecord {
  int episode = 0;
  int step = 0;
  int agent_id = 0;
  Observation obs;
  Action action = Action::kStop;
};

class DemoSink {
 public:
  virtual ~DemoSink() = default;
  virtual void Write(const DemoRecord& record) = 0;
};

// One JSON object per line. Throws FileError if the path cannot be opened.
class JsonlDemoSink : public DemoSink {
 public:
  explicit JsonlDemoSink(const std::string& path);
  ~JsonlDemoSink() override;
  void Write(const DemoRecord& record) override;
  void Flush();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string DemoRecordToJson(const DemoRecord& record);
// Throws CorruptFile on malformed records.
DemoRecord DemoRecordFromJson(const std::string& line);
std::vector<DemoRecord> ReadDemonstrations(const std::string& path);
// Streams records into `sink`; returns the count.
int64_t ReadDemonstrations(const std::string& path, DemoSink& sink);

// Compact in-memory store: one byte per cell for the three grids.
class DemoStore : public DemoSink {
 public:
  explicit DemoStore(int board_size = 11);

  void Write(const DemoRecord& record) override;
  size_t size() const { return actions_.size(); }
  int board_size() const { return n_; }
  Action action(size_t i) const { return actions_[i]; }
  int episode(size_t i) const { return episodes_[i]; }
  Observation observation(size_t i) const;
  void FeaturizeInto(size_t i, int bomb_life, std::span<float> out) const;

 private:
  int n_;
  size_t stride_;
  std::vector<int8_t> packed_;
  std::vector<Action> actions_;
  std::vector<int> episodes_;
  std::vector<int> steps_;
};

struct DemoSummary {
  int episodes = 0;
  int64_t records = 0;
  std::array<int64_t, kNumActions> action_counts{};
  std::array<int, kNumAgents> wins{};
  int draws = 0;
};

// Plays n_episodes of four SimpleAgents on boards seeded from `seed` and
// writes every living agent's (observation, action) per step.
DemoSummary CollectDemonstrations(const GameConfig& game, int n_episodes,
                                  uint64_t seed, DemoSink& sink);

// Behavior cloning over a DemoStore. `train`/`held_out` are record indices.
// With `augment`, each training sample gets a uniformly drawn board symmetry.
struct BcReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;  // on at most ~20000 strided train records
  double held_out_accuracy = 0.0;
  double majority_baseline = 0.0;
};
BcReport TrainBehaviorCloning(Network& net, Optimizer& opt, const DemoStore& data,
                              std::span<const size_t> train,
                              std::span<const size_t> held_out, int epochs,
                              int batch_size, int bomb_life, bool augment, Rng& rng,
                              const std::function<void(int, double)>& on_epoch = {});
double PolicyAccuracy(const Network& net, const DemoStore& data,
                      std::span<const size_t> indices, int bomb_life);
// Frequency of the most common action among `indices`.
double MajorityBaseline(const DemoStore& data, std::span<const size_t> indices);
// Splits records by episode: episodes with index % k == k - 1 are held out.
void SplitByEpisode(const DemoStore& data, int k, std::vector<size_t>* train,
                    std::vector<size_t>* held_out);

// ------------------------------------------------------------- game RL

// Transitions seen by every seat of SimpleAgent self-play, with the
// per-seat rewards the learner would get. Marked is_expert.
int64_t CollectExpertTransitions(const GameConfig& game, int n_episodes,
                                 uint64_t seed, ReplayBuffer& out);

struct GameTrainingReport {
  int64_t env_steps = 0;
  int episodes = 0;
  std::vector<int> episode_rewards;  // learner's final reward per episode
  std::vector<double> losses;
};

// Epsilon-greedy learner in seat 0 against `opponent` clones in seats 1-3.
// The learner's episode ends when it dies. With `expert` set, updates use
// DqfdTrainStep; otherwise DqnTrainStep.
GameTrainingReport TrainInGame(QLearner& learner, const GameConfig& game,
                               const Agent& opponent, int64_t env_steps,
                               ReplayBuffer& self, const ReplayBuffer* expert,
                               const std::function<void(int64_t, double)>& on_log = {});

}  // namespace pommer

#endif  // POMMER_LEARN_H_
