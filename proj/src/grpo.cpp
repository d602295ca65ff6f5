#include "vrft/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace vrft {

std::vector<double> compute_advantages(std::span<const double> rewards,
                                       double std_floor, bool sample_std) {
  const std::size_t g = rewards.size();
  if (g < 2) {
    throw std::invalid_argument("advantage groups need at least two rewards");
  }
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(g);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(sample_std ? g - 1 : g);
  const double std_dev = std::sqrt(var);
  std::vector<double> advantages(g, 0.0);
  if (std_dev < std_floor) {
    return advantages;  // degenerate group: no gradient signal
  }
  for (std::size_t i = 0; i < g; ++i) {
    advantages[i] = (rewards[i] - mean) / std_dev;
  }
  return advantages;
}

double kl_estimate(double logp_new, double logp_ref) {
  const double log_rho = logp_ref - logp_new;
  const double value = std::exp(log_rho) - log_rho - 1.0;
  return value > 0.0 ? value : 0.0;  // guard sub-ulp negatives
}

double grpo_objective(const GroupRollout& rollout, const GrpoConfig& cfg) {
  const std::size_t g = rollout.advantages.size();
  double total = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double rho = std::exp(rollout.logp_new[i] - rollout.logp_old[i]);
    const double clipped = std::clamp(rho, 1.0 - cfg.clip_epsilon,
                                      1.0 + cfg.clip_epsilon);
    const double advantage = rollout.advantages[i];
    const double surrogate =
        std::min(rho * advantage, clipped * advantage);
    const double penalty =
        cfg.kl_coeff * kl_estimate(rollout.logp_new[i], rollout.logp_ref[i]);
    total += surrogate - penalty;
  }
  return total / static_cast<double>(g);
}

ToyPolicy::ToyPolicy(std::vector<int> candidate_counts) {
  logits_.reserve(candidate_counts.size());
  for (int count : candidate_counts) {
    if (count < 2) {
      throw std::invalid_argument("each prompt needs at least two candidates");
    }
    logits_.emplace_back(static_cast<std::size_t>(count), 0.0);
  }
}

void ToyPolicy::add_scaled(int prompt, std::span<const double> delta,
                           double scale) {
  auto& row = logits_[prompt];
  for (std::size_t i = 0; i < row.size(); ++i) {
    row[i] += scale * delta[i];
  }
}

std::vector<double> ToyPolicy::probabilities(int prompt) const {
  const auto& row = logits_[prompt];
  const double max_logit = *std::max_element(row.begin(), row.end());
  std::vector<double> probs(row.size());
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    probs[i] = std::exp(row[i] - max_logit);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

double ToyPolicy::log_prob(int prompt, int candidate) const {
  const auto& row = logits_[prompt];
  const double max_logit = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double logit : row) total += std::exp(logit - max_logit);
  return row[candidate] - max_logit - std::log(total);
}

int ToyPolicy::sample(int prompt, std::mt19937_64& rng) const {
  // Portable uniform in [0,1): 53 high bits of one engine draw.
  const double u =
      static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const std::vector<double> probs = probabilities(prompt);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;  // guard roundoff at the tail
}

GroupRollout build_rollout(const ToyPolicy& policy, const ToyPolicy& old_policy,
                           const ToyPolicy& ref_policy, int prompt,
                           std::span<const int> candidates,
                           std::span<const double> rewards,
                           const GrpoConfig& cfg) {
  GroupRollout rollout;
  rollout.prompt = prompt;
  rollout.candidates.assign(candidates.begin(), candidates.end());
  rollout.rewards.assign(rewards.begin(), rewards.end());
  rollout.advantages =
      compute_advantages(rewards, cfg.advantage_std_floor, cfg.sample_std);
  rollout.logp_new.reserve(candidates.size());
  rollout.logp_old.reserve(candidates.size());
  rollout.logp_ref.reserve(candidates.size());
  for (int candidate : candidates) {
    rollout.logp_new.push_back(policy.log_prob(prompt, candidate));
    rollout.logp_old.push_back(old_policy.log_prob(prompt, candidate));
    rollout.logp_ref.push_back(ref_policy.log_prob(prompt, candidate));
  }
  return rollout;
}

std::vector<double> grpo_objective_gradient(const ToyPolicy& policy,
                                            const GroupRollout& rollout,
                                            const GrpoConfig& cfg) {
  const int prompt = rollout.prompt;
  const std::vector<double> probs = policy.probabilities(prompt);
  const std::size_t num_candidates = probs.size();
  const std::size_t g = rollout.candidates.size();
  std::vector<double> grad(num_candidates, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    const int candidate = rollout.candidates[i];
    const double advantage = rollout.advantages[i];
    const double rho = std::exp(rollout.logp_new[i] - rollout.logp_old[i]);
    // d rho / d logit_k = rho * (1{k==candidate} - pi_k); the surrogate's
    // rho-derivative is A on the unclipped branch and 0 once the min picks
    // the clipped constant.
    bool unclipped_active;
    if (advantage >= 0.0) {
      unclipped_active = rho <= 1.0 + cfg.clip_epsilon;
    } else {
      unclipped_active = rho >= 1.0 - cfg.clip_epsilon;
    }
    const double surrogate_coeff =
        unclipped_active ? advantage * rho : 0.0;
    // d k3 / d logit_k = (1 - rho_ref) * (1{k==candidate} - pi_k).
    const double rho_ref =
        std::exp(rollout.logp_ref[i] - rollout.logp_new[i]);
    const double kl_coeff_term = cfg.kl_coeff * (1.0 - rho_ref);
    const double coeff = surrogate_coeff - kl_coeff_term;
    for (std::size_t k = 0; k < num_candidates; ++k) {
      const double indicator = (static_cast<int>(k) == candidate) ? 1.0 : 0.0;
      grad[k] += coeff * (indicator - probs[k]);
    }
  }
  for (double& v : grad) v /= static_cast<double>(g);
  return grad;
}

StepDiagnostics grpo_step(ToyPolicy& policy, const ToyPolicy& ref_policy,
                          const RewardTable& rewards, const GrpoConfig& cfg,
                          std::mt19937_64& rng) {
  const ToyPolicy old_policy = policy;  // frozen at step start
  StepDiagnostics diag;
  const int num_prompts = policy.num_prompts();
  std::size_t total_samples = 0;
  double objective_sum = 0.0;
  std::vector<GroupRollout> rollouts;
  rollouts.reserve(num_prompts);
  for (int prompt = 0; prompt < num_prompts; ++prompt) {
    std::vector<int> candidates(cfg.group_size);
    std::vector<double> group_rewards(cfg.group_size);
    for (int i = 0; i < cfg.group_size; ++i) {
      candidates[i] = old_policy.sample(prompt, rng);
      group_rewards[i] = rewards[prompt][candidates[i]];
      diag.mean_reward += group_rewards[i];
    }
    GroupRollout rollout = build_rollout(policy, old_policy, ref_policy,
                                         prompt, candidates, group_rewards,
                                         cfg);
    objective_sum += grpo_objective(rollout, cfg);
    const std::vector<double> grad =
        grpo_objective_gradient(policy, rollout, cfg);
    policy.add_scaled(prompt, grad, cfg.learning_rate);
    total_samples += candidates.size();
    rollouts.push_back(std::move(rollout));
  }
  // Post-update diagnostics: how far the step moved each sampled response
  // relative to the clip band, and divergence from the reference.
  std::size_t clipped = 0;
  for (const GroupRollout& rollout : rollouts) {
    for (std::size_t i = 0; i < rollout.candidates.size(); ++i) {
      const double logp_after =
          policy.log_prob(rollout.prompt, rollout.candidates[i]);
      const double rho = std::exp(logp_after - rollout.logp_old[i]);
      if (rho < 1.0 - cfg.clip_epsilon || rho > 1.0 + cfg.clip_epsilon) {
        ++clipped;
      }
      diag.mean_kl += kl_estimate(logp_after, rollout.logp_ref[i]);
    }
  }
  diag.mean_reward /= static_cast<double>(total_samples);
  diag.mean_kl /= static_cast<double>(total_samples);
  diag.clip_fraction =
      static_cast<double>(clipped) / static_cast<double>(total_samples);
  diag.objective = objective_sum / static_cast<double>(num_prompts);
  return diag;
}

double sft_loss(const ToyPolicy& policy, std::span<const SftExample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty SFT batch");
  double loss = 0.0;
  for (const SftExample& example : batch) {
    if (example.target < 0 ||
        example.target >= policy.num_candidates(example.prompt)) {
      throw std::invalid_argument("SFT target outside the candidate set");
    }
    loss -= policy.log_prob(example.prompt, example.target);
  }
  return loss / static_cast<double>(batch.size());
}

double sft_step(ToyPolicy& policy, std::span<const SftExample> batch,
                double learning_rate) {
  const double loss = sft_loss(policy, batch);
  // d loss / d logit_k = -(1/N) sum_i (1{k==target_i} - pi_k) per prompt;
  // accumulated at the pre-step parameters, applied once.
  std::map<int, std::vector<double>> grads;
  for (const SftExample& example : batch) {
    auto [it, inserted] = grads.try_emplace(
        example.prompt,
        std::vector<double>(policy.num_candidates(example.prompt), 0.0));
    const std::vector<double> probs = policy.probabilities(example.prompt);
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const double indicator =
          (static_cast<int>(k) == example.target) ? 1.0 : 0.0;
      it->second[k] +=
          (indicator - probs[k]) / static_cast<double>(batch.size());
    }
  }
  for (const auto& [prompt, grad] : grads) {
    policy.add_scaled(prompt, grad, learning_rate);
  }
  return loss;
}

ToyTrainConfig load_toy_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open training config: " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("training config is not valid JSON: " +
                             std::string(e.what()));
  }
  ToyTrainConfig config;
  config.grpo.seed = doc.value("seed", config.grpo.seed);
  config.grpo.group_size = doc.value("group_size", config.grpo.group_size);
  config.grpo.clip_epsilon =
      doc.value("clip_epsilon", config.grpo.clip_epsilon);
  config.grpo.kl_coeff = doc.value("kl_coeff", config.grpo.kl_coeff);
  config.grpo.advantage_std_floor =
      doc.value("advantage_std_floor", config.grpo.advantage_std_floor);
  config.grpo.sample_std = doc.value("sample_std", config.grpo.sample_std);
  config.grpo.learning_rate =
      doc.value("learning_rate", config.grpo.learning_rate);
  config.grpo.iterations = doc.value("iterations", config.grpo.iterations);
  config.reward.lambda = doc.value("lambda", config.reward.lambda);
  config.sft_iterations = doc.value("sft_iterations", config.sft_iterations);
  config.sft_learning_rate =
      doc.value("sft_learning_rate", config.sft_learning_rate);
  if (config.grpo.group_size < 2) {
    throw std::runtime_error("group_size must be at least 2");
  }
  if (!doc.contains("prompts") || !doc["prompts"].is_array() ||
      doc["prompts"].empty()) {
    throw std::runtime_error("training config needs a non-empty prompts array");
  }
  for (const auto& entry : doc["prompts"]) {
    ToyTask task;
    task.prompt = entry.value("prompt", std::string{});
    const std::string task_string = entry.value("task", std::string{"cls"});
    const auto kind = task_from_name(task_string);
    if (!kind) {
      throw std::runtime_error("unknown task kind: " + task_string);
    }
    task.kind = *kind;
    if (!entry.contains("candidates") || !entry["candidates"].is_array() ||
        entry["candidates"].size() < 2) {
      throw std::runtime_error("each prompt needs at least two candidates");
    }
    for (const auto& candidate : entry["candidates"]) {
      task.candidates.push_back(candidate.get<std::string>());
    }
    task.sft_target = entry.value("sft_target", -1);
    if (task.sft_target >= static_cast<int>(task.candidates.size())) {
      throw std::runtime_error("sft_target outside the candidate set");
    }
    if (!entry.contains("gt")) {
      throw std::runtime_error("each prompt needs a gt object");
    }
    const auto& gt = entry["gt"];
    switch (task.kind) {
      case TaskKind::Classification: {
        const std::string label = gt.value("label", std::string{});
        if (label.size() != 1) {
          throw std::runtime_error("cls gt needs a single-letter label");
        }
        task.gt = ClsLabel{static_cast<char>(
            std::toupper(static_cast<unsigned char>(label[0])))};
        break;
      }
      case TaskKind::VqaClosed:
        task.gt = ClosedAnswer{gt.value("answer", std::string{})};
        break;
      case TaskKind::VqaOpen:
        task.gt = OpenAnswer{gt.value("reference", std::string{})};
        break;
      default:
        throw std::runtime_error(
            "toy training supports cls, vqa_closed, and vqa_open prompts");
    }
    config.tasks.push_back(std::move(task));
  }
  return config;
}

ToyTrainResult run_toy_training(const ToyTrainConfig& config) {
  ToyTrainResult result;
  std::vector<int> candidate_counts;
  candidate_counts.reserve(config.tasks.size());
  for (const ToyTask& task : config.tasks) {
    candidate_counts.push_back(static_cast<int>(task.candidates.size()));
  }
  ToyPolicy policy(candidate_counts);

  // Candidate responses are enumerated, so each is scored exactly once.
  result.rewards.resize(config.tasks.size());
  for (std::size_t t = 0; t < config.tasks.size(); ++t) {
    const ToyTask& task = config.tasks[t];
    ScoreContext ctx;
    ctx.options = parse_options(task.prompt);
    for (const std::string& candidate : task.candidates) {
      result.rewards[t].push_back(
          score(task.kind, candidate, task.gt, config.reward, ctx).total);
    }
  }

  std::vector<SftExample> batch;
  for (std::size_t t = 0; t < config.tasks.size(); ++t) {
    if (config.tasks[t].sft_target >= 0) {
      batch.push_back(SftExample{static_cast<int>(t),
                                 config.tasks[t].sft_target});
    }
  }
  if (!batch.empty()) {
    for (int i = 0; i < config.sft_iterations; ++i) {
      result.sft_losses.push_back(
          sft_step(policy, batch, config.sft_learning_rate));
    }
    result.sft_final_loss = sft_loss(policy, batch);
  }

  const ToyPolicy reference = policy;  // snapshot at RFT start
  std::mt19937_64 rng(config.grpo.seed);
  result.grpo_steps.reserve(config.grpo.iterations);
  for (int step = 0; step < config.grpo.iterations; ++step) {
    result.grpo_steps.push_back(
        grpo_step(policy, reference, result.rewards, config.grpo, rng));
  }
  if (!result.grpo_steps.empty()) {
    result.final_mean_reward = result.grpo_steps.back().mean_reward;
  }
  return result;
}

}  // namespace vrft
