#include "e3p/model.hpp"

#include <cmath>
#include <stdexcept>

#include "e3p/common.hpp"
#include "e3p/ops.hpp"

namespace e3p {

TextMode text_mode_from_string(const std::string& s) {
  if (s == "pseudo_clip") return TextMode::pseudo_clip;
  if (s == "learnable_tokens") return TextMode::learnable_tokens;
  throw std::invalid_argument("unknown text mode: " + s);
}

std::string to_string(TextMode m) {
  return m == TextMode::pseudo_clip ? "pseudo_clip" : "learnable_tokens";
}

void ModelConfig::validate() const {
  if (horizon < 3 || horizon > kMaxHorizon) throw std::invalid_argument("model: horizon must be in [3, 6]");
  if (num_actions < 2) throw std::invalid_argument("model: need at least 2 actions");
  if (num_events < 1) throw std::invalid_argument("model: need at least 1 event");
  if (hidden % heads != 0) throw std::invalid_argument("model: hidden must be divisible by heads");
  if (backbone_layers < 1) throw std::invalid_argument("model: need at least 1 backbone layer");
  if (arm_enabled && arm_layers < 1) throw std::invalid_argument("model: need at least 1 relation layer");
}

E3PModel::E3PModel(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  RandomStream rng = RandomStream::substream(init_seed, "init");
  build(rng);
}

E3PModel::E3PModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  RandomStream rng(0);
  build(rng);
}

void E3PModel::build(RandomStream& rng) {
  visual_mlp_ = Mlp2::create(params_, "feat.visual", cfg_.feature_dim, 256, cfg_.hidden, rng);
  if (cfg_.text_mode == TextMode::pseudo_clip)
    text_mlp_ = Mlp2::create(params_, "feat.text", cfg_.feature_dim, 256, cfg_.hidden, rng);
  if (cfg_.epg_enabled)
    epg_ = EventPromptGenerator::create(params_, cfg_.epg_variant, cfg_.num_events, cfg_.hidden,
                                        cfg_.heads, cfg_.ffn_dim, rng);
  backbone_ = Backbone::create(params_, cfg_.backbone_layers, cfg_.hidden, cfg_.heads, cfg_.ffn_dim,
                               cfg_.horizon, rng);
  if (cfg_.arm_enabled)
    arm_ = ArmStack::create(params_, cfg_.arm_layers, cfg_.hidden, cfg_.heads, cfg_.ffn_dim, rng);
  if (cfg_.text_mode == TextMode::learnable_tokens) {
    const double std = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden));
    prompt_tokens_ = params_.create_gaussian("tokens.prompt", {cfg_.horizon, cfg_.hidden}, std, rng);
    action_tokens_ = params_.create_gaussian("tokens.action", {cfg_.num_actions, cfg_.hidden}, std, rng);
  }
}

void E3PModel::refresh_text_cache(const World& world) const {
  if (cached_prompt_raw_ && cached_embed_seed_ == world.embed_seed) return;
  std::vector<double> praw;
  praw.reserve(static_cast<std::size_t>(cfg_.horizon) * cfg_.feature_dim);
  for (int t = 1; t <= cfg_.horizon; ++t) {
    const std::vector<double>& v = world.provider->embed(input_prompt(t));
    praw.insert(praw.end(), v.begin(), v.end());
  }
  cached_prompt_raw_ = constant({cfg_.horizon, cfg_.feature_dim}, std::move(praw));
  std::vector<double> braw;
  braw.reserve(static_cast<std::size_t>(cfg_.horizon) * cfg_.num_actions * cfg_.feature_dim);
  for (int t = 1; t <= cfg_.horizon; ++t)
    for (const ActionSpec& a : world.actions) {
      const std::vector<double>& v = world.provider->embed(supervision_text(t, a.name));
      braw.insert(braw.end(), v.begin(), v.end());
    }
  cached_bank_raw_ = constant({cfg_.horizon * cfg_.num_actions, cfg_.feature_dim}, std::move(braw));
  cached_embed_seed_ = world.embed_seed;
}

TensorPtr E3PModel::prompt_rows(Tape& tape, const World& world) const {
  if (cfg_.text_mode == TextMode::learnable_tokens) return prompt_tokens_;
  refresh_text_cache(world);
  return text_mlp_.forward(tape, cached_prompt_raw_);
}

TensorPtr E3PModel::bank_rows(Tape& tape, const World& world) const {
  if (cfg_.text_mode == TextMode::learnable_tokens) return action_tokens_;
  refresh_text_cache(world);
  return text_mlp_.forward(tape, cached_bank_raw_);
}

E3PModel::Forward E3PModel::forward_batch(Tape& tape, const std::vector<const PlanInstance*>& batch,
                                          const World& world, const Mask* arm_mask,
                                          bool with_loss) const {
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");
  if (world.num_actions() != cfg_.num_actions || world.num_events() != cfg_.num_events)
    throw ArchitectureMismatch("forward: world action/event counts do not match the model");
  const int t = cfg_.horizon, d = cfg_.feature_dim, batch_n = static_cast<int>(batch.size());
  for (const PlanInstance* p : batch) {
    if (p->horizon != t) throw ShapeError("forward: instance horizon does not match the model");
    if (static_cast<int>(p->o_s.size()) != d || static_cast<int>(p->o_g.size()) != d)
      throw ShapeError("forward: feature dimension mismatch");
  }
  if (cfg_.arm_enabled && arm_mask == nullptr)
    throw std::invalid_argument("forward: relation mask required when ARM is enabled");

  // Visual states, rows (o_s_0, o_g_0, o_s_1, o_g_1, ...).
  std::vector<double> vs;
  vs.reserve(static_cast<std::size_t>(2 * batch_n) * d);
  for (const PlanInstance* p : batch) {
    vs.insert(vs.end(), p->o_s.begin(), p->o_s.end());
    vs.insert(vs.end(), p->o_g.begin(), p->o_g.end());
  }
  TensorPtr vis = visual_mlp_.forward(tape, constant({2 * batch_n, d}, std::move(vs)));

  TensorPtr prompts = prompt_rows(tape, world);  // T x hidden
  TensorPtr bank = bank_rows(tape, world);       // (T*N) x hidden, or N x hidden tokens

  Forward out;
  TensorPtr prompts_e;
  if (cfg_.epg_enabled) {
    std::vector<int> even(batch_n), odd(batch_n);
    for (int b = 0; b < batch_n; ++b) {
      even[b] = 2 * b;
      odd[b] = 2 * b + 1;
    }
    TensorPtr pairs = ops::hcat(tape, ops::gather_rows(tape, vis, even), ops::gather_rows(tape, vis, odd));
    TensorPtr e_hat = epg_.extract_event(tape, pairs);
    out.event_logits = epg_.event_logits(tape, e_hat);
    prompts_e = epg_.aggregate_batch(tape, prompts, e_hat, t);
  } else {
    // EPG ablated: event-aware prompts equal the plain prompts.
    std::vector<int> tile;
    tile.reserve(static_cast<std::size_t>(batch_n) * t);
    for (int b = 0; b < batch_n; ++b)
      for (int s = 0; s < t; ++s) tile.push_back(s);
    prompts_e = ops::gather_rows(tape, prompts, tile);
  }

  TensorPtr q = backbone_.assemble_batch(tape, vis, prompts_e, t);
  TensorPtr encoded = backbone_.forward(tape, q, t);
  TensorPtr a_hat = backbone_.extract_middle(tape, encoded, t);

  if (cfg_.arm_enabled) {
    TensorPtr a_check = arm_.forward(tape, a_hat, t, *arm_mask);
    out.a_final = refine(tape, a_hat, a_check);
  } else {
    out.a_final = a_hat;
  }

  out.step_logits.reserve(t);
  for (int s = 0; s < t; ++s) {
    std::vector<int> rows(batch_n);
    for (int b = 0; b < batch_n; ++b) rows[b] = b * t + s;
    TensorPtr a_s = ops::gather_rows(tape, out.a_final, rows);
    TensorPtr bank_s = bank;
    if (cfg_.text_mode == TextMode::pseudo_clip) {
      std::vector<int> bank_rows_idx(cfg_.num_actions);
      for (int j = 0; j < cfg_.num_actions; ++j) bank_rows_idx[j] = s * cfg_.num_actions + j;
      bank_s = ops::gather_rows(tape, bank, bank_rows_idx);
    }
    out.step_logits.push_back(ops::matmul(tape, a_s, ops::transpose(tape, bank_s)));
  }

  if (with_loss) {
    TensorPtr l_action_sum;
    for (int s = 0; s < t; ++s) {
      std::vector<int> labels(batch_n);
      for (int b = 0; b < batch_n; ++b) labels[b] = batch[b]->gt_actions[s];
      TensorPtr nll = ops::nll_rows(tape, out.step_logits[s], labels);
      l_action_sum = l_action_sum ? ops::add(tape, l_action_sum, nll) : nll;
    }
    out.l_action = ops::scale(tape, l_action_sum, 1.0 / batch_n);
    if (cfg_.epg_enabled) {
      std::vector<int> ys(batch_n);
      for (int b = 0; b < batch_n; ++b) {
        ys[b] = batch[b]->y_e;
        if (ys[b] < 0 || ys[b] >= cfg_.num_events)
          throw std::invalid_argument("forward: event label out of range");
      }
      out.l_event = ops::scale(tape, ops::nll_rows(tape, out.event_logits, ys), 1.0 / batch_n);
    }
    TotalLoss tl = total_loss(tape, out.l_action, out.l_event);
    out.total = tl.value;
    out.report = tl.report;
  }
  return out;
}

}  // namespace e3p
