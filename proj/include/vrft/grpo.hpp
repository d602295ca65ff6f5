#ifndef VRFT_GRPO_HPP_
#define VRFT_GRPO_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vrft/response_parser.hpp"
#include "vrft/reward.hpp"

namespace vrft {

struct GrpoConfig {
  int group_size = 8;                 // G
  double clip_epsilon = 0.2;          // surrogate clip width
  double kl_coeff = 0.001;            // weight of the k3 divergence penalty
  double advantage_std_floor = 1e-8;  // below this the group is degenerate
  bool sample_std = false;            // population std unless set
  double learning_rate = 0.1;
  int iterations = 500;
  std::uint64_t seed = 42;
};

// Group-normalized advantages: (r - mean) / std. Groups whose reward std
// falls below the floor yield all-zero advantages (no gradient). Requires at
// least two rewards.
std::vector<double> compute_advantages(std::span<const double> rewards,
                                       double std_floor = 1e-8,
                                       bool sample_std = false);

// k3 estimator of KL(policy || reference) at one sample: with
// rho = exp(logp_ref - logp_new), returns rho - log(rho) - 1. Non-negative,
// zero exactly when the log-probabilities agree.
double kl_estimate(double logp_new, double logp_ref);

// One sampled group for a single prompt. All vectors share length G.
struct GroupRollout {
  int prompt = 0;
  std::vector<int> candidates;  // sampled candidate index per draw
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};

// Clipped-surrogate group objective (to be maximized):
//   (1/G) sum_g [ min(rho_g A_g, clip(rho_g, 1-eps, 1+eps) A_g)
//                 - beta * k3_g ]
// with rho_g = exp(logp_new - logp_old).
double grpo_objective(const GroupRollout& rollout, const GrpoConfig& cfg);

// Independent softmax distribution per prompt over an enumerated candidate
// set. Log-probabilities are exact, which makes the surrogate objective and
// its gradient checkable without a network.
class ToyPolicy {
 public:
  ToyPolicy() = default;
  explicit ToyPolicy(std::vector<int> candidate_counts);  // zero logits

  int num_prompts() const { return static_cast<int>(logits_.size()); }
  int num_candidates(int prompt) const {
    return static_cast<int>(logits_[prompt].size());
  }
  std::span<const double> logits(int prompt) const { return logits_[prompt]; }
  void set_logit(int prompt, int candidate, double value) {
    logits_[prompt][candidate] = value;
  }
  void add_scaled(int prompt, std::span<const double> delta, double scale);

  std::vector<double> probabilities(int prompt) const;
  double log_prob(int prompt, int candidate) const;
  // Draws one candidate index; consumes exactly one value from the engine.
  int sample(int prompt, std::mt19937_64& rng) const;

 private:
  std::vector<std::vector<double>> logits_;
};

// Fills a rollout for `prompt`: log-probabilities under the three policies
// and group-normalized advantages for the given rewards.
GroupRollout build_rollout(const ToyPolicy& policy, const ToyPolicy& old_policy,
                           const ToyPolicy& ref_policy, int prompt,
                           std::span<const int> candidates,
                           std::span<const double> rewards,
                           const GrpoConfig& cfg);

// Analytic gradient of grpo_objective with respect to the prompt's logits,
// evaluated at `policy`.
std::vector<double> grpo_objective_gradient(const ToyPolicy& policy,
                                            const GroupRollout& rollout,
                                            const GrpoConfig& cfg);

struct StepDiagnostics {
  double mean_reward = 0.0;
  double mean_kl = 0.0;        // k3 against the reference, post-update
  double clip_fraction = 0.0;  // samples whose post-update ratio left the band
  double objective = 0.0;      // value at the sampling point
};

// Rewards are fixed per (prompt, candidate): candidate responses are
// enumerated up front, so scores never change across steps.
using RewardTable = std::vector<std::vector<double>>;

// One GRPO update over every prompt: snapshot the current policy as the old
// policy, sample G responses per prompt from it, score, normalize, and take
// one ascent step on the analytic gradient.
StepDiagnostics grpo_step(ToyPolicy& policy, const ToyPolicy& ref_policy,
                          const RewardTable& rewards, const GrpoConfig& cfg,
                          std::mt19937_64& rng);

struct SftExample {
  int prompt = 0;
  int target = 0;  // candidate index; must be within the prompt's set
};

// Mean cross-entropy -log p(target | prompt) over the batch.
double sft_loss(const ToyPolicy& policy, std::span<const SftExample> batch);
// One gradient-descent step; returns the pre-update loss.
double sft_step(ToyPolicy& policy, std::span<const SftExample> batch,
                double learning_rate);

// --- Toy training driver -------------------------------------------------

struct ToyTask {
  std::string prompt;
  TaskKind kind = TaskKind::VqaOpen;
  GroundTruth gt;
  std::vector<std::string> candidates;  // enumerated responses
  int sft_target = -1;                  // candidate index; -1 = not supervised
};

struct ToyTrainConfig {
  GrpoConfig grpo;
  RewardConfig reward;
  int sft_iterations = 0;
  double sft_learning_rate = 0.5;
  std::vector<ToyTask> tasks;
};

// Reads the flat JSON training schema (see README). Throws
// std::runtime_error with a line/field message on malformed input.
ToyTrainConfig load_toy_train_config(const std::filesystem::path& path);

struct ToyTrainResult {
  std::vector<double> sft_losses;  // pre-update loss per SFT iteration
  double sft_final_loss = 0.0;     // loss after the final SFT update
  std::vector<StepDiagnostics> grpo_steps;
  double final_mean_reward = 0.0;
  RewardTable rewards;  // the scored candidate table, for inspection
};

// Scores every candidate once with the reward engine, runs the SFT phase,
// then the GRPO phase. Fully deterministic under the config seed.
ToyTrainResult run_toy_training(const ToyTrainConfig& config);

}  // namespace vrft

#endif  // VRFT_GRPO_HPP_
