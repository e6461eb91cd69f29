#include "emi/harness/experiment.hpp"

#include "emi/agent/policy_update.hpp"
#include "emi/envs/boximage.hpp"
#include "emi/error.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace emi::harness {

namespace fs = std::filesystem;
using num::Matrix;

namespace {

EmiModelConfig model_config_for(const std::string& env, int embedding_dim) {
  auto probe = envs::make_env_factory(env)(0);
  const envs::EnvSpec& spec = probe->spec();
  return EmiModelConfig::defaults(spec.observation, spec.action, embedding_dim);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
}

// First two embedding columns; a single column is padded with zeros.
Matrix scatter_points(const Matrix& e) {
  Matrix out = Matrix::Zero(e.rows(), 2);
  out.leftCols(std::min<Eigen::Index>(2, e.cols())) = e.leftCols(std::min<Eigen::Index>(2, e.cols()));
  return out;
}

void write_embeddings(const fs::path& dir, const Matrix& phi, const std::vector<double>& colour,
                      const std::string& title) {
  CsvTable table;
  for (Eigen::Index j = 0; j < phi.cols(); ++j) table.header.push_back("phi_" + std::to_string(j + 1));
  table.header.push_back("r_int");
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    std::vector<double> row(phi.row(i).begin(), phi.row(i).end());
    row.push_back(colour[static_cast<std::size_t>(i)]);
    table.rows.push_back(std::move(row));
  }
  write_csv(dir / "embeddings.csv", table);
  write_scatter_svg(dir / "embeddings.svg", scatter_points(phi), colour, ScatterStyle{title});
}

}  // namespace

void save_model(const fs::path& path, EmiModel& model, const std::string& env) {
  Checkpoint cp = snapshot(model.named_parameters());
  cp.meta["kind"] = "emi-model";
  cp.meta["env"] = env;
  cp.meta["embedding_dim"] = std::to_string(model.embedding_dim());
  write_checkpoint(path, cp);
}

EmiModel load_model(const fs::path& path, std::string* env) {
  const Checkpoint cp = read_checkpoint(path);
  const auto kind = cp.meta.find("kind");
  const auto name = cp.meta.find("env");
  const auto dim = cp.meta.find("embedding_dim");
  if (kind == cp.meta.end() || kind->second != "emi-model" || name == cp.meta.end() ||
      dim == cp.meta.end()) {
    throw ConfigError(path.string() + ": not an EMI model checkpoint");
  }
  num::Rng rng(0);
  EmiModel model(model_config_for(name->second, std::stoi(dim->second)), rng);
  restore(cp, model.named_parameters());
  if (env) *env = name->second;
  return model;
}

agent::RolloutBuffer collect_random_transitions(const std::string& env, int samples,
                                                num::Rng& rng) {
  const envs::EnvFactory factory = envs::make_env_factory(env);
  auto probe = factory(0);
  agent::Policy policy(probe->spec(), agent::PolicyConfig{}, rng);
  return agent::collect_rollouts(factory, policy, samples, rng);
}

ExperimentSummary run_experiment(const RunConfig& config) {
  config.validate();
  const fs::path dir = config.output_dir;
  prepare_dir(dir);
  save_config(dir / "config.json", config);

  num::Rng rng(config.seed);
  const envs::EnvFactory factory = envs::make_env_factory(config.env);
  const envs::EnvSpec spec = factory(0)->spec();

  EmiModel model(EmiModelConfig::defaults(spec.observation, spec.action, config.embedding_dim), rng);
  agent::Policy policy(spec, config.policy, rng);
  EmbeddingTrainer embedder(model, config.emi);
  agent::PolicyTrainer improver(policy, config.policy);

  ProgressWriter progress(dir / "progress.csv");

  ExperimentSummary summary;
  summary.output_dir = dir;
  long long steps = 0;
  Batch last_batch;
  std::vector<double> last_intrinsic;

  for (int it = 1; it <= config.iterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    agent::RolloutBuffer buffer = agent::collect_rollouts(factory, policy, config.steps_per_iteration, rng);
    steps += static_cast<long long>(buffer.size());
    Batch batch = buffer.to_batch();

    std::vector<double> intrinsic;
    if (config.intrinsic.mode == IntrinsicMode::Diversity) {
      const DiversityReference ref = make_diversity_reference(model, batch.states, config.intrinsic.sigma);
      intrinsic = diversity_reward(model, batch.states, batch.next_states, ref);
    } else {
      intrinsic = prediction_error_reward(model, batch);
    }

    const std::vector<LossReport> epochs = embedder.train(batch, rng);
    LossReport loss;
    for (const auto& e : epochs) loss += e;
    loss = loss.scaled(1.0 / static_cast<double>(epochs.size()));

    buffer.rewards = augment_rewards(buffer.env_rewards(), intrinsic, config.intrinsic.eta);
    improver.update(buffer, rng);

    IterationRecord rec;
    rec.iteration = it;
    rec.steps = steps;
    rec.mean_return = mean_of(buffer.episode_returns);
    rec.std_return = std_of(buffer.episode_returns);
    rec.loss = loss;
    rec.mean_r_int = mean_of(intrinsic);
    if (config.log_wall_clock) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    progress.append(rec);
    summary.records.push_back(rec);
    if (buffer.goal_episodes > 0) summary.goal_iterations.push_back(it);

    last_batch = std::move(batch);
    last_intrinsic = std::move(intrinsic);
  }

  save_model(dir / "model.ckpt", model, config.env);
  Checkpoint pc = snapshot(policy.named_parameters());
  pc.meta["kind"] = "policy";
  pc.meta["env"] = config.env;
  write_checkpoint(dir / "policy.ckpt", pc);
  write_embeddings(dir, model.embed_states(last_batch.states), last_intrinsic,
                   config.env + " phi(s), last iteration");
  return summary;
}

namespace {

struct BoxSamples {
  Batch batch;
  Matrix positions;  // true disk centre before the move, m x 2
  std::vector<bool> clipped;
};

BoxSamples collect_box_samples(int samples, num::Rng& rng) {
  envs::BoxImage env(rng());
  agent::Policy policy(env.spec(), agent::PolicyConfig{}, rng);
  std::vector<envs::Observation> s, a, s_next;
  BoxSamples out;
  out.positions.resize(samples, 2);
  out.clipped.reserve(static_cast<std::size_t>(samples));
  envs::Observation obs = env.reset();
  int length = 0;
  for (int i = 0; i < samples; ++i) {
    out.positions(i, 0) = env.position()[0];
    out.positions(i, 1) = env.position()[1];
    const envs::Action action = agent::applied_action(env.spec(), policy.sample_action(obs, rng).action);
    envs::StepResult r = env.step(action);
    s.push_back(obs);
    a.push_back(action);
    s_next.push_back(r.observation);
    out.clipped.push_back(r.clipped);
    if (++length >= env.spec().max_episode_steps) {
      obs = env.reset();
      length = 0;
    } else {
      obs = std::move(r.observation);
    }
  }
  out.batch = Batch{agent::stack_rows(s), agent::stack_rows(a), agent::stack_rows(s_next)};
  return out;
}

CsvTable paired_table(const std::vector<std::string>& header, const Matrix& left, const Matrix& right) {
  CsvTable t;
  t.header = header;
  for (Eigen::Index i = 0; i < left.rows(); ++i) {
    std::vector<double> row(left.row(i).begin(), left.row(i).end());
    row.insert(row.end(), right.row(i).begin(), right.row(i).end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

BoxEmbedResult boximage_embed(const BoxEmbedConfig& config) {
  if (config.samples < config.loss.minibatch) {
    throw ConfigError("samples: must be >= minibatch (" + std::to_string(config.loss.minibatch) + ")");
  }
  EmiLossConfig loss = config.loss;
  loss.kl_target = config.regularize;
  loss.validate();

  num::Rng rng(config.seed);
  BoxSamples data = collect_box_samples(config.samples, rng);

  envs::BoxImage probe(0);
  EmiModel model(EmiModelConfig::defaults(probe.spec().observation, probe.spec().action,
                                          config.embedding_dim),
                 rng);
  EmbeddingTrainer trainer(model, loss);
  const std::vector<LossReport> epochs = trainer.train(data.batch, rng);

  BoxEmbedResult result;
  result.final_loss = epochs.back();
  result.epochs = epochs;
  const Matrix phi = model.embed_states(data.batch.states);
  const Matrix psi = model.embed_actions(data.batch.actions);
  result.state_r2 = eval_embedding_alignment(phi, data.positions);
  result.action_r2 = eval_embedding_alignment(psi, data.batch.actions);
  result.boundary = boundary_error_analysis(model, data.batch, data.clipped);
  result.mean_phi_distance = mean_pairwise_distance(phi.topRows(std::min<Eigen::Index>(2000, phi.rows())));

  if (!config.output_dir.empty()) {
    const fs::path dir = config.output_dir;
    prepare_dir(dir);
    save_model(dir / "model.ckpt", model, "boximage");
    write_csv(dir / "states.csv", paired_table({"true_x", "true_y", "phi_1", "phi_2"}, data.positions,
                                               scatter_points(phi)));
    write_csv(dir / "actions.csv", paired_table({"a_1", "a_2", "psi_1", "psi_2"}, data.batch.actions,
                                                scatter_points(psi)));
    const std::vector<double> colour_x(data.positions.col(0).begin(), data.positions.col(0).end());
    const std::vector<double> colour_a(data.batch.actions.col(0).begin(), data.batch.actions.col(0).end());
    write_scatter_svg(dir / "states.svg", scatter_points(phi), colour_x,
                      ScatterStyle{"phi(s) coloured by true x"});
    write_scatter_svg(dir / "actions.svg", scatter_points(psi), colour_a,
                      ScatterStyle{"psi(a) coloured by a_1", "psi_1", "psi_2"});
  }
  return result;
}

}  // namespace emi::harness
