#include "e3p/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "e3p/common.hpp"

namespace e3p {

namespace {

double log_or_floor(double p) { return p > 0.0 ? std::log(p) : -1e30; }

void check_same_count(const std::vector<std::vector<int>>& preds,
                      const std::vector<std::vector<int>>& gts, const char* what) {
  if (preds.size() != gts.size() || preds.empty())
    throw std::invalid_argument(std::string(what) + ": prediction/ground-truth counts disagree or are empty");
}

}  // namespace

StepDistributions step_distributions(const std::vector<std::vector<double>>& dots) {
  if (dots.empty() || dots[0].empty()) throw std::invalid_argument("step_distributions: empty input");
  StepDistributions out;
  out.horizon = static_cast<int>(dots.size());
  out.num_actions = static_cast<int>(dots[0].size());
  out.logp.reserve(static_cast<std::size_t>(out.horizon) * out.num_actions);
  for (const auto& row : dots) {
    if (static_cast<int>(row.size()) != out.num_actions)
      throw ShapeError("step_distributions: ragged rows");
    double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double x : row) s += std::exp(x - mx);
    const double lse = mx + std::log(s);
    for (double x : row) out.logp.push_back(x - lse);
  }
  return out;
}

TransitionPrior estimate_transition(const std::vector<PlanInstance>& train_plans, int num_actions,
                                    double lambda) {
  if (num_actions < 1) throw std::invalid_argument("estimate_transition: need at least one action");
  if (lambda < 0.0) throw std::invalid_argument("estimate_transition: lambda must be >= 0");
  TransitionPrior prior;
  prior.num_actions = num_actions;
  prior.lambda = lambda;
  std::vector<double> counts(static_cast<std::size_t>(num_actions) * num_actions, 0.0);
  for (const PlanInstance& p : train_plans)
    for (std::size_t t = 0; t + 1 < p.gt_actions.size(); ++t) {
      const int a = p.gt_actions[t], b = p.gt_actions[t + 1];
      if (a < 0 || a >= num_actions || b < 0 || b >= num_actions)
        throw std::invalid_argument("estimate_transition: action id out of range");
      counts[static_cast<std::size_t>(a) * num_actions + b] += 1.0;
    }
  prior.p.assign(counts.size(), 0.0);
  for (int i = 0; i < num_actions; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < num_actions; ++j) row_sum += counts[static_cast<std::size_t>(i) * num_actions + j] + lambda;
    if (row_sum <= 0.0) {
      // lambda = 0 and no observations: uniform fallback keeps rows stochastic.
      for (int j = 0; j < num_actions; ++j)
        prior.p[static_cast<std::size_t>(i) * num_actions + j] = 1.0 / num_actions;
      continue;
    }
    for (int j = 0; j < num_actions; ++j)
      prior.p[static_cast<std::size_t>(i) * num_actions + j] =
          (counts[static_cast<std::size_t>(i) * num_actions + j] + lambda) / row_sum;
  }
  return prior;
}

std::vector<int> viterbi(const StepDistributions& dists, const TransitionPrior& prior) {
  if (dists.num_actions != prior.num_actions)
    throw ShapeError("viterbi: distribution/prior action counts disagree");
  const int t_len = dists.horizon, n = dists.num_actions;
  std::vector<double> score(static_cast<std::size_t>(t_len) * n);
  std::vector<int> back(static_cast<std::size_t>(t_len) * n, -1);
  for (int j = 0; j < n; ++j) score[j] = dists.at(0, j);
  for (int t = 1; t < t_len; ++t) {
    for (int j = 0; j < n; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int i = 0; i < n; ++i) {
        const double cand = score[static_cast<std::size_t>(t - 1) * n + i] + log_or_floor(prior.at(i, j));
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      score[static_cast<std::size_t>(t) * n + j] = best + dists.at(t, j);
      back[static_cast<std::size_t>(t) * n + j] = arg;
    }
  }
  int last = 0;
  double best = score[static_cast<std::size_t>(t_len - 1) * n];
  for (int j = 1; j < n; ++j) {
    const double cand = score[static_cast<std::size_t>(t_len - 1) * n + j];
    if (cand > best) {
      best = cand;
      last = j;
    }
  }
  std::vector<int> path(t_len);
  path[t_len - 1] = last;
  for (int t = t_len - 1; t > 0; --t) path[t - 1] = back[static_cast<std::size_t>(t) * n + path[t]];
  return path;
}

double success_rate(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts) {
  check_same_count(preds, gts, "success_rate");
  int hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == gts[i]) ++hits;
  return static_cast<double>(hits) / preds.size();
}

double mean_accuracy(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts) {
  check_same_count(preds, gts, "mean_accuracy");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].size() != gts[i].size()) throw ShapeError("mean_accuracy: horizon mismatch");
    int match = 0;
    for (std::size_t t = 0; t < preds[i].size(); ++t)
      if (preds[i][t] == gts[i][t]) ++match;
    acc += static_cast<double>(match) / preds[i].size();
  }
  return acc / preds.size();
}

namespace {

std::pair<int, int> intersection_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  int inter = 0;
  for (int x : sa)
    if (sb.count(x)) ++inter;
  const int uni = static_cast<int>(sa.size() + sb.size()) - inter;
  return {inter, uni};
}

}  // namespace

double mean_iou(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts) {
  check_same_count(preds, gts, "mean_iou");
  double iou = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto [inter, uni] = intersection_union(preds[i], gts[i]);
    iou += uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
  }
  return iou / preds.size();
}

double mean_iou_pooled(const std::vector<std::vector<int>>& preds,
                       const std::vector<std::vector<int>>& gts) {
  check_same_count(preds, gts, "mean_iou_pooled");
  long long inter_total = 0, union_total = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto [inter, uni] = intersection_union(preds[i], gts[i]);
    inter_total += inter;
    union_total += uni;
  }
  return union_total == 0 ? 0.0 : static_cast<double>(inter_total) / union_total;
}

double event_conflict_rate(const std::vector<std::vector<int>>& preds, const World& world) {
  if (preds.empty()) throw std::invalid_argument("event_conflict_rate: no predictions");
  int conflicts = 0;
  for (const auto& pred : preds)
    if (!world.any_event_covers(pred)) ++conflicts;
  return static_cast<double>(conflicts) / preds.size();
}

double absolute_error(const std::vector<double>& f, const std::vector<double>& e) {
  if (f.size() != e.size()) throw ShapeError("absolute_error: matrix sizes disagree");
  double ae = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) ae += std::abs(f[i] - e[i]);
  return ae;
}

TransitionAnalysis transition_analysis(
    const std::vector<std::vector<std::vector<int>>>& sequences_by_event, const World& world) {
  if (static_cast<int>(sequences_by_event.size()) != world.num_events())
    throw std::invalid_argument("transition_analysis: one sequence bucket per event required");
  TransitionAnalysis out;
  for (int e = 0; e < world.num_events(); ++e) {
    const EventSpec& ev = world.events[e];
    const int n = ev.size();
    std::vector<double> counts(static_cast<std::size_t>(n) * n, 0.0);
    for (const auto& seq : sequences_by_event[e])
      for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        const int i = ev.local_index(seq[t]), j = ev.local_index(seq[t + 1]);
        if (i < 0 || j < 0) continue;  // outside this event's vocabulary
        counts[static_cast<std::size_t>(i) * n + j] += 1.0;
      }
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += counts[static_cast<std::size_t>(i) * n + j];
      if (row > 0.0)
        for (int j = 0; j < n; ++j) counts[static_cast<std::size_t>(i) * n + j] /= row;
      // all-zero rows stay zero
    }
    out.ae.push_back(absolute_error(counts, ev.transition));
    out.matrices.push_back(std::move(counts));
  }
  double sum = 0.0;
  for (double a : out.ae) sum += a;
  out.mae = out.ae.empty() ? 0.0 : sum / out.ae.size();
  return out;
}

std::string EvalReport::to_json_string() const {
  nlohmann::json j;
  j["sr"] = sr;
  j["macc"] = macc;
  j["miou"] = miou;
  j["miou_pooled"] = miou_pooled;
  j["event_conflict_rate"] = event_conflict;
  if (event_accuracy)
    j["event_accuracy"] = *event_accuracy;
  else
    j["event_accuracy"] = nullptr;
  j["ae_per_event"] = ae_per_event;
  j["mae"] = mae;
  j["predicted_transitions"] = predicted_transitions;
  j["num_instances"] = num_instances;
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  auto line = [&os](const std::string& k, double v) {
    os << k;
    for (std::size_t i = k.size(); i < 24; ++i) os << ' ';
    os << v << "\n";
  };
  os << "metric                  value\n";
  line("sr", sr);
  line("macc", macc);
  line("miou", miou);
  line("miou_pooled", miou_pooled);
  line("event_conflict_rate", event_conflict);
  if (event_accuracy) line("event_accuracy", *event_accuracy);
  line("mae", mae);
  line("num_instances", num_instances);
  return os.str();
}

}  // namespace e3p
