#include "e3p/prompts.hpp"

#include <stdexcept>

namespace e3p {

namespace {

const char* kOrdinals[kMaxHorizon] = {"Firstly", "Secondly", "Thirdly", "Fourthly", "Fifthly", "Sixthly"};

std::string fill(const std::string& templ, const std::string& key, const std::string& value) {
  std::string out = templ;
  const auto pos = out.find(key);
  if (pos == std::string::npos) throw std::logic_error("prompt template is missing blank " + key);
  out.replace(pos, key.size(), value);
  return out;
}

}  // namespace

std::string ordinal(int t) {
  if (t < 1 || t > kMaxHorizon)
    throw std::out_of_range("ordinal: step " + std::to_string(t) + " outside 1.." + std::to_string(kMaxHorizon));
  return kOrdinals[t - 1];
}

std::string input_prompt(int t) { return fill(kPromptTemplate, "[order]", ordinal(t)); }

std::string supervision_text(int t, const std::string& action_name) {
  if (action_name.empty()) throw std::invalid_argument("supervision_text: empty action name");
  return fill(input_prompt(t), "[action]", action_name);
}

ActionBank build_bank(Tape& tape, const World& world, int t, const Mlp2& text_mlp, int gt_index) {
  const int n = world.num_actions();
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(n) * EmbeddingProvider::kDim);
  for (const ActionSpec& a : world.actions) {
    const std::vector<double>& v = world.provider->embed(supervision_text(t, a.name));
    raw.insert(raw.end(), v.begin(), v.end());
  }
  ActionBank bank;
  bank.step = t;
  bank.vectors = text_mlp.forward(tape, constant({n, EmbeddingProvider::kDim}, std::move(raw)));
  bank.gt_index = gt_index;
  if (gt_index >= n) throw std::out_of_range("build_bank: gt_index out of range");
  return bank;
}

}  // namespace e3p
