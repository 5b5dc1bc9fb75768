#include "e3p/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "e3p/common.hpp"

namespace e3p {

using nlohmann::json;

namespace {

const char* kVerbs[] = {"Melt",  "Flip", "Pour",  "Whisk", "Chop",  "Spread", "Grill",  "Stir",
                        "Slice", "Peel", "Toast", "Drain", "Rinse", "Knead",  "Season", "Scoop",
                        "Press", "Fold", "Crack", "Grate", "Squeeze", "Roll",  "Brush",  "Trim"};
const char* kNouns[] = {"Butter", "Bread",  "Egg",    "Milk",   "Sugar", "Flour",  "Cheese", "Tomato",
                        "Onion",  "Garlic", "Pepper", "Batter", "Dough", "Cream",  "Sauce",  "Salad",
                        "Steak",  "Rice",   "Pasta",  "Beans",  "Apple", "Carrot", "Lemon",  "Syrup"};
const char* kEventThemes[] = {"Toast",  "Pancake", "Omelet", "Salad", "Pasta",  "Curry",
                              "Burger", "Soup",    "Pie",    "Stew",  "Muffin", "Taco",
                              "Pizza",  "Risotto", "Waffle", "Kebab", "Chili",  "Quiche"};

std::vector<double> normalized(std::vector<double> v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double n = std::sqrt(n2);
  if (n < 1e-12) throw std::runtime_error("normalize: vector too close to zero");
  for (double& x : v) x /= n;
  return v;
}

int sample_categorical(const std::vector<double>& probs, RandomStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

EmbeddingProvider EmbeddingProvider::from_table(
    std::unordered_map<std::string, std::vector<double>> table) {
  EmbeddingProvider p(0);
  p.mode_ = Mode::file;
  p.cache_ = std::move(table);
  for (const auto& [k, v] : p.cache_)
    if (static_cast<int>(v.size()) != kDim)
      throw std::runtime_error("embedding table: entry \"" + k + "\" is not " + std::to_string(kDim) + "-dimensional");
  return p;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding table: " + path);
  json j = json::parse(in);
  std::unordered_map<std::string, std::vector<double>> table;
  for (auto it = j.begin(); it != j.end(); ++it) table[it.key()] = it.value().get<std::vector<double>>();
  return from_table(std::move(table));
}

const std::vector<double>& EmbeddingProvider::embed(const std::string& text) const {
  if (text.empty()) throw std::invalid_argument("embed: empty string");
  auto it = cache_.find(text);
  if (it != cache_.end()) return it->second;
  if (mode_ == Mode::file) throw MissingEmbedding("no embedding for sentence: " + text);
  RandomStream rs(fnv1a64(text, seed_ ^ 0x51ed270b9f5f5e6bull));
  std::vector<double> v(kDim);
  for (double& x : v) x = rs.gaussian();
  auto [pos, inserted] = cache_.emplace(text, normalized(std::move(v)));
  return pos->second;
}

int EventSpec::local_index(int global_action_id) const {
  for (std::size_t i = 0; i < action_ids.size(); ++i)
    if (action_ids[i] == global_action_id) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& World::event_prototype(int event_id) const {
  return provider->embed("event/" + events.at(event_id).name);
}

const std::vector<double>& World::action_vector(int action_id) const {
  return provider->embed("action/" + actions.at(action_id).name);
}

bool World::any_event_covers(const std::vector<int>& action_ids) const {
  for (const EventSpec& e : events) {
    bool all = true;
    for (int a : action_ids)
      if (e.local_index(a) < 0) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

World gen_world(const WorldConfig& cfg) {
  const int E = cfg.events, ape = cfg.actions_per_event;
  if (E <= 0 || ape < 2) throw std::invalid_argument("gen_world: need >= 1 event and >= 2 actions per event");
  if (ape < cfg.t_max) throw std::invalid_argument("gen_world: actions_per_event must be >= t_max");
  if (E > static_cast<int>(std::size(kEventThemes)))
    throw std::invalid_argument("gen_world: too many events for the name tables");
  if (cfg.overlap_fraction < 0.0 || cfg.overlap_fraction >= 1.0)
    throw std::invalid_argument("gen_world: overlap_fraction must be in [0, 1)");
  if (cfg.dominance <= 0.0 || cfg.dominance > 1.0)
    throw std::invalid_argument("gen_world: dominance must be in (0, 1]");
  const int N = E * ape;

  RandomStream rng = RandomStream::substream(cfg.seed, "world");

  // Distinct verb-noun action names.
  std::vector<int> combo(static_cast<int>(std::size(kVerbs)) * static_cast<int>(std::size(kNouns)));
  for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = static_cast<int>(i);
  rng.shuffle(combo);
  if (N > static_cast<int>(combo.size())) throw std::invalid_argument("gen_world: too many actions for the name tables");

  World w;
  w.sigma = cfg.sigma;
  w.embed_seed = fnv1a64("embed", cfg.seed);
  w.provider = std::make_shared<EmbeddingProvider>(w.embed_seed);

  std::vector<int> themes(static_cast<int>(std::size(kEventThemes)));
  for (std::size_t i = 0; i < themes.size(); ++i) themes[i] = static_cast<int>(i);
  rng.shuffle(themes);

  w.actions.resize(N);
  for (int e = 0; e < E; ++e) {
    for (int k = 0; k < ape; ++k) {
      const int id = e * ape + k;
      const int c = combo[id];
      w.actions[id] = {id,
                       std::string(kVerbs[c / std::size(kNouns)]) + " " + kNouns[c % std::size(kNouns)],
                       e};
    }
  }

  const int borrowed = static_cast<int>(std::lround(cfg.overlap_fraction * ape));
  w.events.resize(E);
  for (int e = 0; e < E; ++e) {
    EventSpec& ev = w.events[e];
    ev.id = e;
    ev.name = std::string("Make ") + kNouns[combo[e] % std::size(kNouns)] + " " + kEventThemes[themes[e]];
    for (int k = 0; k < ape; ++k) ev.action_ids.push_back(e * ape + k);
    if (borrowed > 0 && E > 1) {
      std::vector<int> pool;
      for (int a = 0; a < N; ++a)
        if (w.actions[a].event_id != e) pool.push_back(a);
      rng.shuffle(pool);
      for (int k = 0; k < borrowed && k < static_cast<int>(pool.size()); ++k)
        ev.action_ids.push_back(pool[k]);
    }

    const int n = ev.size();
    ev.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
    ev.start.assign(n, 1.0 / n);
    for (int i = 0; i < n; ++i) {
      int preferred = rng.uniform_int(n - 1);
      if (preferred >= i) ++preferred;
      double* row = ev.transition.data() + static_cast<std::size_t>(i) * n;
      if (n == 2) {
        row[preferred] = 1.0;
        continue;
      }
      double rest = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i || j == preferred) continue;
        row[j] = 0.5 + rng.uniform();
        rest += row[j];
      }
      for (int j = 0; j < n; ++j) {
        if (j == i || j == preferred) continue;
        row[j] *= (1.0 - cfg.dominance) / rest;
      }
      row[preferred] = cfg.dominance;
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += row[j];
      for (int j = 0; j < n; ++j) row[j] /= s;
    }
  }
  return w;
}

World gen_world(int events, int total_actions, int actions_per_event, double sigma, std::uint64_t seed) {
  if (events * actions_per_event != total_actions)
    throw std::invalid_argument("gen_world: events * actions_per_event must equal total action count");
  WorldConfig cfg;
  cfg.events = events;
  cfg.actions_per_event = actions_per_event;
  cfg.sigma = sigma;
  cfg.seed = seed;
  cfg.t_max = std::min(actions_per_event, 3);
  return gen_world(cfg);
}

ProcedureVideo sample_video(const World& world, int event_id, int length, RandomStream& rng) {
  if (event_id < 0 || event_id >= world.num_events())
    throw std::invalid_argument("sample_video: unknown event " + std::to_string(event_id));
  if (length < 1) throw std::invalid_argument("sample_video: length must be >= 1");
  const EventSpec& ev = world.events[event_id];
  const int n = ev.size();

  ProcedureVideo video;
  video.event_id = event_id;
  int local = sample_categorical(ev.start, rng);
  video.actions.push_back(ev.action_ids[local]);
  for (int s = 1; s < length; ++s) {
    std::vector<double> row(ev.transition.begin() + static_cast<std::size_t>(local) * n,
                            ev.transition.begin() + static_cast<std::size_t>(local + 1) * n);
    local = sample_categorical(row, rng);
    video.actions.push_back(ev.action_ids[local]);
  }

  const std::vector<double>& proto = world.event_prototype(event_id);
  video.boundary_states.reserve(length + 1);
  for (int k = 0; k <= length; ++k) {
    std::vector<double> state = proto;
    if (k > 0) {
      const std::vector<double>& left = world.action_vector(video.actions[k - 1]);
      for (int d = 0; d < EmbeddingProvider::kDim; ++d) state[d] += left[d];
    }
    if (k < length) {
      const std::vector<double>& right = world.action_vector(video.actions[k]);
      for (int d = 0; d < EmbeddingProvider::kDim; ++d) state[d] += right[d];
    }
    if (world.sigma > 0.0)
      for (double& x : state) x += world.sigma * rng.gaussian();
    video.boundary_states.push_back(normalized(std::move(state)));
  }
  return video;
}

std::vector<PlanInstance> curate_plans(const ProcedureVideo& video, int horizon, int video_index) {
  if (horizon < 3 || horizon > 6) throw std::invalid_argument("curate_plans: horizon must be in [3, 6]");
  const int L = static_cast<int>(video.actions.size());
  std::vector<PlanInstance> plans;
  if (L < horizon) return plans;
  plans.reserve(L - horizon + 1);
  for (int i = 0; i + horizon <= L; ++i) {
    PlanInstance p;
    p.o_s = video.boundary_states[i];
    p.o_g = video.boundary_states[i + horizon];
    p.gt_actions.assign(video.actions.begin() + i, video.actions.begin() + i + horizon);
    p.y_e = video.event_id;
    p.horizon = horizon;
    p.video_index = video_index;
    plans.push_back(std::move(p));
  }
  return plans;
}

std::pair<std::vector<PlanInstance>, std::vector<PlanInstance>> split_dataset(
    const std::vector<PlanInstance>& instances, double ratio, std::uint64_t seed) {
  if (instances.empty()) throw std::invalid_argument("split_dataset: empty instance list");
  std::set<int> vid_set;
  for (const auto& p : instances) vid_set.insert(p.video_index);
  std::vector<int> vids(vid_set.begin(), vid_set.end());
  RandomStream rng = RandomStream::substream(seed, "split");
  rng.shuffle(vids);
  const int n_train = static_cast<int>(std::lround(ratio * static_cast<double>(vids.size())));
  std::set<int> train_vids(vids.begin(), vids.begin() + std::clamp(n_train, 0, static_cast<int>(vids.size())));
  std::pair<std::vector<PlanInstance>, std::vector<PlanInstance>> out;
  for (const auto& p : instances) {
    if (train_vids.count(p.video_index))
      out.first.push_back(p);
    else
      out.second.push_back(p);
  }
  return out;
}

std::vector<PlanInstance> Dataset::curate_all(int horizon) const {
  std::vector<PlanInstance> all;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    auto plans = curate_plans(videos[v], horizon, static_cast<int>(v));
    all.insert(all.end(), std::make_move_iterator(plans.begin()), std::make_move_iterator(plans.end()));
  }
  return all;
}

Dataset generate_dataset(const WorldConfig& cfg, int videos_per_event, int video_length) {
  if (videos_per_event < 1 || video_length < 1)
    throw std::invalid_argument("generate_dataset: counts must be positive");
  Dataset ds;
  ds.world = gen_world(cfg);
  RandomStream rng = RandomStream::substream(cfg.seed, "videos");
  for (int e = 0; e < ds.world.num_events(); ++e)
    for (int v = 0; v < videos_per_event; ++v)
      ds.videos.push_back(sample_video(ds.world, e, video_length, rng));
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  json world;
  world["sigma"] = ds.world.sigma;
  world["embed_seed"] = ds.world.embed_seed;
  world["actions"] = json::array();
  for (const auto& a : ds.world.actions)
    world["actions"].push_back({{"id", a.id}, {"name", a.name}, {"event_id", a.event_id}});
  world["events"] = json::array();
  for (const auto& e : ds.world.events) {
    const int n = e.size();
    json transition = json::array();
    for (int i = 0; i < n; ++i)
      transition.push_back(std::vector<double>(e.transition.begin() + static_cast<std::size_t>(i) * n,
                                               e.transition.begin() + static_cast<std::size_t>(i + 1) * n));
    world["events"].push_back({{"id", e.id},
                               {"name", e.name},
                               {"action_ids", e.action_ids},
                               {"transition", transition},
                               {"start", e.start}});
  }
  json videos = json::array();
  for (const auto& v : ds.videos)
    videos.push_back(
        {{"event_id", v.event_id}, {"actions", v.actions}, {"boundary_states", v.boundary_states}});

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  out << json{{"world", world}, {"videos", videos}}.dump();
  out << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  json j = json::parse(in);
  Dataset ds;
  const json& world = j.at("world");
  ds.world.sigma = world.at("sigma").get<double>();
  ds.world.embed_seed = world.at("embed_seed").get<std::uint64_t>();
  ds.world.provider = std::make_shared<EmbeddingProvider>(ds.world.embed_seed);
  for (const json& a : world.at("actions")) {
    ActionSpec spec;
    spec.id = a.at("id").get<int>();
    spec.name = a.at("name").get<std::string>();
    spec.event_id = a.at("event_id").get<int>();
    ds.world.actions.push_back(std::move(spec));
  }
  for (const json& e : world.at("events")) {
    EventSpec spec;
    spec.id = e.at("id").get<int>();
    spec.name = e.at("name").get<std::string>();
    spec.action_ids = e.at("action_ids").get<std::vector<int>>();
    for (const json& row : e.at("transition"))
      for (const json& x : row) spec.transition.push_back(x.get<double>());
    spec.start = e.at("start").get<std::vector<double>>();
    if (spec.transition.size() != spec.action_ids.size() * spec.action_ids.size())
      throw std::runtime_error("load_dataset: transition matrix size mismatch for event " + spec.name);
    ds.world.events.push_back(std::move(spec));
  }
  for (const json& v : j.at("videos")) {
    ProcedureVideo video;
    video.event_id = v.at("event_id").get<int>();
    video.actions = v.at("actions").get<std::vector<int>>();
    video.boundary_states = v.at("boundary_states").get<std::vector<std::vector<double>>>();
    if (video.boundary_states.size() != video.actions.size() + 1)
      throw std::runtime_error("load_dataset: boundary state count mismatch");
    ds.videos.push_back(std::move(video));
  }
  return ds;
}

}  // namespace e3p
