#pragma once

#include <optional>
#include <string>
#include <vector>

#include "e3p/world.hpp"

namespace e3p {

// Per-step log-probabilities over the N actions (rows log-sum-exp to 0).
struct StepDistributions {
  int horizon = 0;
  int num_actions = 0;
  std::vector<double> logp;  // horizon x num_actions, row-major
  double at(int t, int j) const { return logp[static_cast<std::size_t>(t) * num_actions + j]; }
};

// Row t = log softmax over j of dots[t][j].
StepDistributions step_distributions(const std::vector<std::vector<double>>& dots);

// Row-stochastic transition matrix over all N actions, estimated from
// successive ground-truth pairs of the training plans with add-lambda
// smoothing. With lambda = 0, rows without counts fall back to uniform.
struct TransitionPrior {
  int num_actions = 0;
  double lambda = 1.0;
  std::vector<double> p;  // N x N
  double at(int i, int j) const { return p[static_cast<std::size_t>(i) * num_actions + j]; }
};

TransitionPrior estimate_transition(const std::vector<PlanInstance>& train_plans, int num_actions,
                                    double lambda = 1.0);

// Highest-scoring action sequence under per-step log-probabilities plus the
// log transition prior between successive steps; ties break toward the lower
// action id.
std::vector<int> viterbi(const StepDistributions& dists, const TransitionPrior& prior);

double success_rate(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts);
double mean_accuracy(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts);
// Order-agnostic set IoU averaged per plan.
double mean_iou(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& gts);
// Pooled variant: total intersection over total union across all plans.
double mean_iou_pooled(const std::vector<std::vector<int>>& preds,
                       const std::vector<std::vector<int>>& gts);

// Fraction of predictions not covered by any single event's vocabulary.
double event_conflict_rate(const std::vector<std::vector<int>>& preds, const World& world);

struct TransitionAnalysis {
  // Per event: empirical transition matrix over the event's own actions
  // (local indexing; rows without counts stay zero) and its absolute error
  // against the event's ground-truth matrix.
  std::vector<std::vector<double>> matrices;
  std::vector<double> ae;
  double mae = 0.0;
};

// sequences_by_event[e] holds the decoded sequences whose ground truth event
// is e; pairs with either action outside the event's vocabulary are skipped.
TransitionAnalysis transition_analysis(const std::vector<std::vector<std::vector<int>>>& sequences_by_event,
                                       const World& world);

// Sum of elementwise absolute differences between two n x n matrices.
double absolute_error(const std::vector<double>& f, const std::vector<double>& e);

struct EvalReport {
  double sr = 0.0;
  double macc = 0.0;
  double miou = 0.0;
  double miou_pooled = 0.0;
  double event_conflict = 0.0;
  std::optional<double> event_accuracy;
  std::vector<double> ae_per_event;
  double mae = 0.0;
  std::vector<std::vector<double>> predicted_transitions;
  int num_instances = 0;

  std::string to_json_string() const;
  std::string to_table() const;
};

}  // namespace e3p
