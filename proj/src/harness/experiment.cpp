#include "gifair/harness/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gifair/data/partition.hpp"
#include "gifair/errors.hpp"
#include "gifair/harness/gamma.hpp"
#include "gifair/version.hpp"

namespace gifair {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config key \"" + key + "\": " + why);
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "expected a finite number");
  return x;
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

template <class T>
Setter count_field(T ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const json& v, const std::string& k) {
    c.*member = as_count(v, k);
  };
}

Setter real_field(double ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const json& v, const std::string& k) {
    c.*member = as_real(v, k);
  };
}

Setter string_field(std::string ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const json& v, const std::string& k) {
    c.*member = as_string(v, k);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"scenario", string_field(&ExperimentConfig::scenario)},
      {"seed",
       [](ExperimentConfig& c, const json& v, const std::string& k) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
           bad(k, "expected a nonnegative integer");
         c.seed = v.get<std::uint64_t>();
       }},
      {"data_scheme", string_field(&ExperimentConfig::data_scheme)},
      {"group_sizes",
       [](ExperimentConfig& c, const json& v, const std::string& k) {
         if (!v.is_array()) bad(k, "expected an array of client counts");
         c.group_sizes.clear();
         for (const auto& e : v) c.group_sizes.push_back(as_count(e, k));
       }},
      {"samples_per_client", count_field(&ExperimentConfig::samples_per_client)},
      {"feature_dim", count_field(&ExperimentConfig::feature_dim)},
      {"group_shift", real_field(&ExperimentConfig::group_shift)},
      {"noise_sd", real_field(&ExperimentConfig::noise_sd)},
      {"num_classes", count_field(&ExperimentConfig::num_classes)},
      {"classes_per_client", count_field(&ExperimentConfig::classes_per_client)},
      {"class_separation", real_field(&ExperimentConfig::class_separation)},
      {"condition_number", real_field(&ExperimentConfig::condition_number)},
      {"client_jitter", real_field(&ExperimentConfig::client_jitter)},
      {"train_fraction", real_field(&ExperimentConfig::train_fraction)},
      {"validation_fraction", real_field(&ExperimentConfig::validation_fraction)},
      {"objective", string_field(&ExperimentConfig::objective)},
      {"hidden_width", count_field(&ExperimentConfig::hidden_width)},
      {"ridge", real_field(&ExperimentConfig::ridge)},
      {"algorithm", string_field(&ExperimentConfig::algorithm)},
      {"rounds", count_field(&ExperimentConfig::rounds)},
      {"local_steps", count_field(&ExperimentConfig::local_steps)},
      {"participation", real_field(&ExperimentConfig::participation)},
      {"batch_size", count_field(&ExperimentConfig::batch_size)},
      {"sampling", string_field(&ExperimentConfig::sampling)},
      {"lr_schedule", string_field(&ExperimentConfig::lr_schedule)},
      {"lr_beta", real_field(&ExperimentConfig::lr_beta)},
      {"lr_gamma", real_field(&ExperimentConfig::lr_gamma)},
      {"lambda",
       [](ExperimentConfig& c, const json& v, const std::string& k) {
         if (!v.is_null()) c.lambda = as_real(v, k);
       }},
      {"lambda_fraction",
       [](ExperimentConfig& c, const json& v, const std::string& k) {
         if (!v.is_null()) c.lambda_fraction = as_real(v, k);
       }},
      {"gradient_noise", real_field(&ExperimentConfig::gradient_noise)},
      {"refresh_loss", string_field(&ExperimentConfig::refresh_loss)},
      {"metrics_every", count_field(&ExperimentConfig::metrics_every)},
      {"num_workers", count_field(&ExperimentConfig::num_workers)},
      {"ditto_lambda", real_field(&ExperimentConfig::ditto_lambda)},
      {"ditto_steps", count_field(&ExperimentConfig::ditto_steps)},
      {"ditto_lr_schedule", string_field(&ExperimentConfig::ditto_lr_schedule)},
      {"ditto_lr_beta", real_field(&ExperimentConfig::ditto_lr_beta)},
      {"ditto_lr_gamma", real_field(&ExperimentConfig::ditto_lr_gamma)},
      {"output_dir", string_field(&ExperimentConfig::output_dir)},
  };
  return table;
}

void require_one_of(const std::string& key, const std::string& value,
                    std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  bad(key, "\"" + value + "\" is not one of " + list);
}

void validate(const ExperimentConfig& c) {
  require_one_of("data_scheme", c.data_scheme, {"group_shifted", "iid", "label_skew", "quadratic"});
  require_one_of("objective", c.objective, {"least_squares", "logistic", "small_mlp", "quadratic"});
  require_one_of("algorithm", c.algorithm, {"gifair", "fedavg", "ditto"});
  require_one_of("sampling", c.sampling, {"by_probability", "uniform"});
  require_one_of("lr_schedule", c.lr_schedule, {"inverse_t", "inverse_sqrt", "constant"});
  require_one_of("ditto_lr_schedule", c.ditto_lr_schedule,
                 {"inverse_t", "inverse_sqrt", "constant"});
  require_one_of("refresh_loss", c.refresh_loss, {"local_iterate", "aggregate"});
  if ((c.data_scheme == "quadratic") != (c.objective == "quadratic"))
    bad("objective", "the quadratic objective goes with (and only with) data_scheme \"quadratic\"");
  if (c.data_scheme == "group_shifted" && c.objective == "logistic")
    bad("objective", "group_shifted data has real-valued labels; logistic needs a class scheme");
  if (c.group_sizes.size() < 2) bad("group_sizes", "need at least two groups");
  for (std::size_t s : c.group_sizes)
    if (s == 0) bad("group_sizes", "every group needs at least one client");
  if (c.samples_per_client == 0) bad("samples_per_client", "must be >= 1");
  if (c.feature_dim == 0) bad("feature_dim", "must be >= 1");
  if (c.hidden_width == 0) bad("hidden_width", "must be >= 1");
  if (c.noise_sd < 0.0) bad("noise_sd", "must be >= 0");
  if (c.ridge < 0.0) bad("ridge", "must be >= 0");
  if (c.gradient_noise < 0.0) bad("gradient_noise", "must be >= 0");
  if (c.condition_number < 1.0) bad("condition_number", "must be >= 1");
  if (c.num_classes < 2) bad("num_classes", "must be >= 2");
  if (!(c.train_fraction > 0.0) || !(c.validation_fraction > 0.0) ||
      c.train_fraction + c.validation_fraction >= 1.0)
    bad("train_fraction", "need train > 0, validation > 0 and train + validation < 1");
  if (c.lambda && c.lambda_fraction) bad("lambda", "set lambda or lambda_fraction, not both");
  if (c.lambda && *c.lambda < 0.0) bad("lambda", "must be >= 0");
  if (c.lambda_fraction && (*c.lambda_fraction < 0.0 || *c.lambda_fraction >= 1.0))
    bad("lambda_fraction", "must lie in [0, 1)");
  if (c.algorithm == "fedavg" && ((c.lambda && *c.lambda != 0.0) ||
                                  (c.lambda_fraction && *c.lambda_fraction != 0.0)))
    bad("lambda", "fedavg runs with lambda = 0");
  if (c.output_dir.empty()) bad("output_dir", "must not be empty");
}

LrSchedule make_schedule(const std::string& kind, double beta, double gamma, std::size_t steps,
                         const std::string& key) {
  try {
    if (kind == "inverse_t") return LrSchedule::inverse_t(beta, gamma, std::max<std::size_t>(steps, 1));
    if (kind == "inverse_sqrt") return LrSchedule::inverse_sqrt(beta, gamma);
    return LrSchedule::constant(beta);
  } catch (const std::invalid_argument& e) {
    bad(key, e.what());
  }
}

std::uint64_t client_seed(std::uint64_t seed, StreamTag tag, std::size_t k) {
  Rng rng = derive_stream(seed, tag, k, 0x5EED);
  return rng();
}

Eigen::VectorXd group_direction(std::size_t i, std::size_t d, std::size_t m, double shift) {
  const double position = 2.0 * static_cast<double>(i) / static_cast<double>(d - 1) - 1.0;
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                   shift * position / std::sqrt(static_cast<double>(m)));
}

void relabel_for(const std::string& objective, DatasetShard& shard) {
  if (objective != "logistic") return;
  for (Eigen::Index i = 0; i < shard.labels.size(); ++i)
    shard.labels(i) = std::fmod(shard.labels(i), 2.0);
}

ObjectivePtr make_objective(const ExperimentConfig& c, DatasetShard shard) {
  if (c.objective == "least_squares") return make_least_squares(std::move(shard), c.ridge);
  if (c.objective == "logistic") return make_logistic(std::move(shard), c.ridge);
  return make_small_mlp(std::move(shard), c.hidden_width, derive_stream(c.seed, StreamTag::init)(),
                        c.ridge);
}

std::vector<double> losses_at(const ParamVector& theta, const std::vector<ObjectivePtr>& objs) {
  return client_losses(theta, objs);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json spread_json(const SpreadSummary& s) {
  return json{{"mean", s.mean}, {"variance", s.variance}, {"discrepancy", s.discrepancy}};
}

json split_json(const SplitSpread& s) {
  return json{{"train", spread_json(s.train)},
              {"validation", spread_json(s.validation)},
              {"test", spread_json(s.test)}};
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["data_scheme"] = c.data_scheme;
  j["group_sizes"] = c.group_sizes;
  j["samples_per_client"] = c.samples_per_client;
  j["feature_dim"] = c.feature_dim;
  j["group_shift"] = c.group_shift;
  j["noise_sd"] = c.noise_sd;
  j["num_classes"] = c.num_classes;
  j["classes_per_client"] = c.classes_per_client;
  j["class_separation"] = c.class_separation;
  j["condition_number"] = c.condition_number;
  j["client_jitter"] = c.client_jitter;
  j["train_fraction"] = c.train_fraction;
  j["validation_fraction"] = c.validation_fraction;
  j["objective"] = c.objective;
  j["hidden_width"] = c.hidden_width;
  j["ridge"] = c.ridge;
  j["algorithm"] = c.algorithm;
  j["rounds"] = c.rounds;
  j["local_steps"] = c.local_steps;
  j["participation"] = c.participation;
  j["batch_size"] = c.batch_size;
  j["sampling"] = c.sampling;
  j["lr_schedule"] = c.lr_schedule;
  j["lr_beta"] = c.lr_beta;
  j["lr_gamma"] = c.lr_gamma;
  j["lambda"] = c.lambda ? json(*c.lambda) : json(nullptr);
  j["lambda_fraction"] = c.lambda_fraction ? json(*c.lambda_fraction) : json(nullptr);
  j["gradient_noise"] = c.gradient_noise;
  j["refresh_loss"] = c.refresh_loss;
  j["metrics_every"] = c.metrics_every;
  j["num_workers"] = c.num_workers;
  j["ditto_lambda"] = c.ditto_lambda;
  j["ditto_steps"] = c.ditto_steps;
  j["ditto_lr_schedule"] = c.ditto_lr_schedule;
  j["ditto_lr_beta"] = c.ditto_lr_beta;
  j["ditto_lr_gamma"] = c.ditto_lr_gamma;
  j["output_dir"] = c.output_dir;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (doc.contains("config")) {
    if (!doc["config"].is_object()) throw std::invalid_argument("manifest \"config\" must be an object");
    doc = doc["config"];
  }
  ExperimentConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("unknown config key \"" + key + "\"");
    it->second(c, value, key);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

EngineConfig make_engine_config(const ExperimentConfig& c, double lambda) {
  EngineConfig e;
  e.rounds = c.rounds;
  e.local_steps = c.local_steps;
  e.participation = c.participation;
  e.batch_size = c.batch_size;
  e.schedule = make_schedule(c.lr_schedule, c.lr_beta, c.lr_gamma, c.local_steps, "lr_gamma");
  e.sampling = c.sampling == "uniform" ? SamplingMode::uniform : SamplingMode::by_probability;
  e.lambda = lambda;
  e.master_seed = c.seed;
  e.gradient_noise_sd = c.gradient_noise;
  e.refresh_loss = c.refresh_loss == "aggregate" ? RefreshLoss::aggregate : RefreshLoss::local_iterate;
  e.metrics_every = c.metrics_every;
  e.num_workers = c.num_workers;
  return e;
}

Scenario build_scenario(const ExperimentConfig& c) {
  validate(c);
  const std::size_t K = std::accumulate(c.group_sizes.begin(), c.group_sizes.end(), std::size_t{0});
  const std::size_t d = c.group_sizes.size();
  const std::size_t m = c.feature_dim;

  // Every client holds the same number of samples, so p_k (and lambda_max)
  // are known before any data exists.
  Scenario s{FederationSpec::from_group_sizes(c.group_sizes,
                                              std::vector<std::size_t>(K, c.samples_per_client)),
             {}, {}, {}, {}, 0.0, 0.0};
  s.lambda_max = lambda_max(s.federation);
  if (c.lambda_fraction) s.lambda = *c.lambda_fraction * s.lambda_max;
  else if (c.lambda) s.lambda = *c.lambda;
  if (!(s.lambda < s.lambda_max))
    bad(c.lambda ? "lambda" : "lambda_fraction",
        "lambda=" + format_real(s.lambda) + " must be < lambda_max=" + format_real(s.lambda_max));
  make_engine_config(c, s.lambda).validate(s.federation);
  if (c.algorithm == "ditto")
    DittoConfig{c.ditto_lambda, c.ditto_steps,
                make_schedule(c.ditto_lr_schedule, c.ditto_lr_beta, c.ditto_lr_gamma, c.ditto_steps,
                              "ditto_lr_gamma")}
        .validate();

  if (c.data_scheme == "quadratic") {
    for (std::size_t k = 0; k < K; ++k) {
      Rng rng = derive_stream(c.seed, StreamTag::data, k);
      std::normal_distribution<double> normal(0.0, 1.0);
      ParamVector opt = group_direction(s.federation.group_of(k), d, m, c.group_shift);
      for (Eigen::Index j = 0; j < opt.size(); ++j) opt[j] += c.client_jitter * normal(rng);
      const double cond = m == 1 ? 1.0 : c.condition_number;
      s.train.push_back(make_quadratic(m, cond, opt, client_seed(c.seed, StreamTag::data, k)));
    }
    s.validation = s.train;
    s.test = s.train;
    s.theta0 = ParamVector::Zero(static_cast<Eigen::Index>(m));
    return s;
  }

  std::vector<DatasetShard> shards;
  if (c.data_scheme == "group_shifted") {
    std::vector<LinearGroupGenerator> gens;
    for (std::size_t i = 0; i < d; ++i)
      gens.push_back({group_direction(i, d, m, c.group_shift), c.noise_sd, 0.0, 1.0});
    shards = partition_group_shifted(K, c.group_sizes, gens, c.samples_per_client, c.seed).shards;
  } else {
    const std::size_t total = K * c.samples_per_client;
    const std::size_t per_class =
        std::max(c.samples_per_client, (total + c.num_classes - 1) / c.num_classes);
    const DatasetShard pool =
        make_classification_pool(c.num_classes, per_class, m, c.class_separation, c.seed);
    if (c.data_scheme == "iid") {
      const std::vector<std::size_t> sizes(K, c.samples_per_client);
      shards = partition_iid(pool, K, sizes, c.seed);
    } else {
      shards = partition_label_skew(pool, K, c.classes_per_client, c.samples_per_client, c.seed);
    }
    for (auto& sh : shards) relabel_for(c.objective, sh);
  }

  std::vector<std::size_t> train_counts;
  for (std::size_t k = 0; k < K; ++k) {
    auto split = split_shard(shards[k], c.train_fraction, c.validation_fraction,
                             client_seed(c.seed, StreamTag::split, k));
    train_counts.push_back(split.train.size());
    s.train.push_back(make_objective(c, std::move(split.train)));
    s.validation.push_back(make_objective(c, std::move(split.validation)));
    s.test.push_back(make_objective(c, std::move(split.test)));
  }
  // Equal shard sizes give equal train counts, so p_k is unchanged.
  s.federation = FederationSpec::from_group_sizes(c.group_sizes, std::move(train_counts));
  if (c.objective == "small_mlp")
    s.theta0 = static_cast<const SmallMlpObjective&>(*s.train.front()).initial_parameters();
  else
    s.theta0 = ParamVector::Zero(static_cast<Eigen::Index>(s.train.front()->dim()));
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  Scenario s = build_scenario(c);
  const EngineConfig engine = make_engine_config(c, s.lambda);
  ExperimentResult r;
  r.lambda = s.lambda;
  r.lambda_max = s.lambda_max;
  r.groups.assign(s.federation.groups().begin(), s.federation.groups().end());
  r.weights.assign(s.federation.weights().begin(), s.federation.weights().end());

  TrainingHooks hooks;
  if (all_quadratic(s.train)) {
    r.gamma_k = gamma_diagnostics(s.train, FairnessConfig(s.lambda, s.federation)).gamma_k;
    hooks.gamma_k = r.gamma_k;
  }
  const auto initial = initial_group_losses(s.theta0, s.train, s.federation);

  std::optional<PersonalStates> personal;
  if (c.algorithm == "ditto") {
    DittoConfig ditto{c.ditto_lambda, c.ditto_steps,
                      make_schedule(c.ditto_lr_schedule, c.ditto_lr_beta, c.ditto_lr_gamma,
                                    c.ditto_steps, "ditto_lr_gamma")};
    auto out = run_ditto_training(engine, ditto, s.federation, s.train, s.theta0,
                                  PersonalStates(s.train.size(), s.theta0), initial, hooks);
    r.theta = std::move(out.theta);
    r.trajectory = std::move(out.trajectory);
    r.audit = out.audit;
    personal = std::move(out.personal);
  } else {
    auto out = run_training(engine, s.federation, s.train, s.theta0, initial, hooks);
    r.theta = std::move(out.theta);
    r.trajectory = std::move(out.trajectory);
    r.audit = out.audit;
  }

  r.train_losses = losses_at(r.theta, s.train);
  r.validation_losses = losses_at(r.theta, s.validation);
  r.test_losses = losses_at(r.theta, s.test);
  r.loss = {summarize_spread(r.train_losses, s.federation),
            summarize_spread(r.validation_losses, s.federation),
            summarize_spread(r.test_losses, s.federation)};

  if (s.train.front()->accuracy(r.theta)) {
    auto acc = [&](const std::vector<ObjectivePtr>& objs) {
      std::vector<double> a;
      for (const auto& o : objs) a.push_back(*o->accuracy(r.theta));
      return a;
    };
    const auto tr = acc(s.train), va = acc(s.validation), te = acc(s.test);
    r.accuracy = SplitSpread{summarize_spread(tr, s.federation),
                             summarize_spread(va, s.federation),
                             summarize_spread(te, s.federation)};
    r.test_accuracy = te;
  }

  if (personal) {
    auto per = [&](const std::vector<ObjectivePtr>& objs) {
      std::vector<double> v;
      for (std::size_t k = 0; k < objs.size(); ++k) v.push_back(objs[k]->value((*personal)[k]));
      return summarize_spread(v, s.federation);
    };
    r.personal_loss = SplitSpread{per(s.train), per(s.validation), per(s.test)};
  }
  return r;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string metrics_csv(const std::vector<MetricsRecord>& trajectory) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& r : trajectory) {
    out += std::to_string(r.round) + ',' + std::to_string(r.step) + ',' + format_real(r.mean_loss) +
           ',' + format_real(r.loss_variance) + ',' + format_real(r.discrepancy) + ',' +
           format_real(r.objective_value) + ',' + format_real(r.grad_norm_sq) + ',' +
           format_real(r.gamma_k) + '\n';
  }
  return out;
}

ExperimentResult run_experiment_to_disk(const ExperimentConfig& c) {
  // Validation (including the lambda gate) happens before the output
  // directory is touched.
  validate(c);
  ExperimentResult r = run_experiment(c);
  const std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  write_text(dir / "metrics.csv", metrics_csv(r.trajectory));

  std::string clients = "client,group,weight,train_loss,validation_loss,test_loss,test_accuracy\n";
  for (std::size_t k = 0; k < r.train_losses.size(); ++k) {
    clients += std::to_string(k) + ',' + std::to_string(r.groups[k]) + ',' +
               format_real(r.weights[k]) + ',' + format_real(r.train_losses[k]) + ',' +
               format_real(r.validation_losses[k]) + ',' + format_real(r.test_losses[k]) + ',' +
               format_real(r.test_accuracy ? (*r.test_accuracy)[k]
                                           : std::numeric_limits<double>::quiet_NaN()) +
               '\n';
  }
  write_text(dir / "clients.csv", clients);

  json summary;
  summary["loss"] = split_json(r.loss);
  summary["accuracy"] = r.accuracy ? split_json(*r.accuracy) : json(nullptr);
  summary["personal_loss"] = r.personal_loss ? split_json(*r.personal_loss) : json(nullptr);
  summary["gamma_k"] = r.gamma_k ? json(*r.gamma_k) : json(nullptr);
  summary["weights"] = json{{"min", r.audit.min_weight},
                            {"max", r.audit.max_weight},
                            {"client_updates", r.audit.client_updates},
                            {"frozen_violations", r.audit.frozen_violations}};
  summary["rounds_recorded"] = r.trajectory.size();
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  json manifest;
  manifest["version"] = std::string(kVersion);
  manifest["config"] = config_json(c);
  manifest["lambda"] = r.lambda;
  manifest["lambda_max"] = r.lambda_max;
  manifest["seeds"] = json{{"master", c.seed}};
  manifest["num_clients"] = r.groups.size();
  manifest["num_groups"] = c.group_sizes.size();
  manifest["dim"] = static_cast<std::size_t>(r.theta.size());
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return r;
}

}  // namespace gifair
