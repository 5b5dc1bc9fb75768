#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "e3p/rng.hpp"

namespace e3p {

// Deterministic stand-in for a pre-trained text/vision encoder. In pseudo
// mode a seeded hash of the string drives a Gaussian draw which is then
// normalized; in file mode sentences are looked up in a loaded table.
class EmbeddingProvider {
 public:
  enum class Mode { pseudo, file };
  static constexpr int kDim = 512;

  explicit EmbeddingProvider(std::uint64_t seed) : mode_(Mode::pseudo), seed_(seed) {}
  static EmbeddingProvider from_file(const std::string& path);
  static EmbeddingProvider from_table(std::unordered_map<std::string, std::vector<double>> table);

  const std::vector<double>& embed(const std::string& text) const;
  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

 private:
  Mode mode_;
  std::uint64_t seed_ = 0;
  mutable std::unordered_map<std::string, std::vector<double>> cache_;
};

struct ActionSpec {
  int id = 0;
  std::string name;
  int event_id = 0;  // owning event
};

struct EventSpec {
  int id = 0;
  std::string name;
  std::vector<int> action_ids;     // event vocabulary, global action ids
  std::vector<double> transition;  // n x n row-stochastic, local indices
  std::vector<double> start;       // n, stochastic

  int size() const { return static_cast<int>(action_ids.size()); }
  int local_index(int global_action_id) const;  // -1 when absent
  double transition_at(int i, int j) const { return transition[static_cast<std::size_t>(i) * size() + j]; }
};

struct ProcedureVideo {
  int event_id = 0;
  std::vector<int> actions;                         // length L
  std::vector<std::vector<double>> boundary_states; // L + 1 unit-norm vectors
};

struct PlanInstance {
  std::vector<double> o_s, o_g;  // 512-dim visual features
  std::vector<int> gt_actions;   // length horizon
  int y_e = 0;
  int horizon = 0;
  int video_index = 0;  // provenance, used for leakage-free splitting
};

struct WorldConfig {
  int events = 4;
  int actions_per_event = 5;
  double sigma = 0.1;
  std::uint64_t seed = 7;
  // Fraction of each event's vocabulary borrowed from other events' actions.
  double overlap_fraction = 0.0;
  // Probability mass of the preferred successor in each transition row.
  double dominance = 0.9;
  // Largest plan horizon the world needs to support.
  int t_max = 3;
};

struct World {
  std::vector<ActionSpec> actions;
  std::vector<EventSpec> events;
  double sigma = 0.1;
  std::uint64_t embed_seed = 0;
  std::shared_ptr<EmbeddingProvider> provider;

  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_events() const { return static_cast<int>(events.size()); }
  const std::vector<double>& event_prototype(int event_id) const;
  const std::vector<double>& action_vector(int action_id) const;
  // True when some single event's vocabulary contains every given action.
  bool any_event_covers(const std::vector<int>& action_ids) const;
};

World gen_world(const WorldConfig& cfg);
World gen_world(int events, int total_actions, int actions_per_event, double sigma, std::uint64_t seed);

ProcedureVideo sample_video(const World& world, int event_id, int length, RandomStream& rng);

std::vector<PlanInstance> curate_plans(const ProcedureVideo& video, int horizon, int video_index = 0);

// Split by source video: all windows of one video land in one side.
std::pair<std::vector<PlanInstance>, std::vector<PlanInstance>> split_dataset(
    const std::vector<PlanInstance>& instances, double ratio, std::uint64_t seed);

struct Dataset {
  World world;
  std::vector<ProcedureVideo> videos;
  std::vector<PlanInstance> curate_all(int horizon) const;
};

Dataset generate_dataset(const WorldConfig& cfg, int videos_per_event, int video_length);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace e3p
