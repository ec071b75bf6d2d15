#include "strebm/checkpoint.hpp"

#include <set>

#include "strebm/errors.hpp"

namespace strebm {

using nlohmann::json;

namespace {

constexpr std::string_view kCheckpointFormat = "strebm-checkpoint/1";

json vector_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + ": expected an array");
  Vector out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw InvalidArgument(std::string(what) + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  return *it;
}

json moments_json(const AdamMoments& m) { return {{"m", vector_json(m.m)}, {"v", vector_json(m.v)}}; }

AdamMoments moments_from(const json& j) {
  return {vector_from(field(j, "m"), "moments.m"), vector_from(field(j, "v"), "moments.v")};
}

}  // namespace

json config_to_json(const TrainConfig& c) {
  return {
      {"n_sources", c.n_sources},
      {"nu_y", c.nu_y},
      {"lambda_gp", c.lambda_gp},
      {"lambda_sep", c.lambda_sep},
      {"sigma_init", c.sigma_init},
      {"sigma_f_sq", c.sigma_f_sq},
      {"jitter", c.jitter},
      {"eps_s", c.eps_s},
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"ell_min", c.ell_min},
      {"ell_max", c.ell_max},
      {"eta_init", vector_json(c.resolved_eta_init())},
      {"generator",
       {{"kind", std::string(to_string(c.generator.kind))},
        {"hidden", c.generator.hidden},
        {"use_bias", c.generator.use_bias}}},
      {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
  };
}

TrainConfig config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
  static const std::set<std::string> known{
      "n_sources", "nu_y",   "lambda_gp", "lambda_sep", "sigma_init", "sigma_f_sq",
      "jitter",    "eps_s",  "learning_rate", "epochs", "seed",       "ell_min",
      "ell_max",   "eta_init", "generator", "adam"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }
  auto get = [&](const char* key, auto& out) {
    if (const auto it = j.find(key); it != j.end()) it->get_to(out);
  };
  try {
    get("n_sources", c.n_sources);
    get("nu_y", c.nu_y);
    get("lambda_gp", c.lambda_gp);
    get("lambda_sep", c.lambda_sep);
    get("sigma_init", c.sigma_init);
    get("sigma_f_sq", c.sigma_f_sq);
    get("jitter", c.jitter);
    get("eps_s", c.eps_s);
    get("learning_rate", c.learning_rate);
    get("epochs", c.epochs);
    get("seed", c.seed);
    get("ell_min", c.ell_min);
    get("ell_max", c.ell_max);
    if (const auto it = j.find("eta_init"); it != j.end()) c.eta_init = vector_from(*it, "eta_init");
    if (const auto it = j.find("generator"); it != j.end()) {
      if (const auto k = it->find("kind"); k != it->end())
        c.generator.kind = parse_generator_kind(k->get<std::string>());
      if (const auto h = it->find("hidden"); h != it->end()) h->get_to(c.generator.hidden);
      if (const auto b = it->find("use_bias"); b != it->end()) b->get_to(c.generator.use_bias);
    }
    if (const auto it = j.find("adam"); it != j.end()) {
      if (const auto b = it->find("beta1"); b != it->end()) b->get_to(c.adam.beta1);
      if (const auto b = it->find("beta2"); b != it->end()) b->get_to(c.adam.beta2);
      if (const auto e = it->find("epsilon"); e != it->end()) e->get_to(c.adam.epsilon);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return c;
}

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", vector_json(m.flat())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = field(j, "rows").get<std::size_t>();
  const auto cols = field(j, "cols").get<std::size_t>();
  const Vector data = vector_from(field(j, "data"), "matrix.data");
  if (data.size() != rows * cols) throw InvalidArgument("matrix: data length mismatch");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json generator_to_json(const GeneratorParams& params) {
  if (params.kind() == GeneratorKind::linear) {
    const auto& p = params.linear();
    json j{{"kind", "linear"}, {"use_bias", p.use_bias}, {"W", matrix_to_json(p.W)}};
    if (p.use_bias) j["b"] = vector_json(p.b);
    return j;
  }
  const auto& p = params.mlp();
  return {{"kind", "mlp"},
          {"activation", "tanh"},
          {"W1", matrix_to_json(p.W1)},
          {"b1", vector_json(p.b1)},
          {"W2", matrix_to_json(p.W2)},
          {"b2", vector_json(p.b2)},
          {"W3", matrix_to_json(p.W3)},
          {"b3", vector_json(p.b3)}};
}

GeneratorParams generator_from_json(const json& j) {
  const auto kind = parse_generator_kind(field(j, "kind").get<std::string>());
  if (kind == GeneratorKind::linear) {
    LinearParams p;
    p.use_bias = field(j, "use_bias").get<bool>();
    p.W = matrix_from_json(field(j, "W"));
    if (p.use_bias) p.b = vector_from(field(j, "b"), "b");
    return GeneratorParams(std::move(p));
  }
  if (field(j, "activation").get<std::string>() != "tanh")
    throw InvalidArgument("generator: only tanh activation is supported");
  MlpParams p;
  p.W1 = matrix_from_json(field(j, "W1"));
  p.b1 = vector_from(field(j, "b1"), "b1");
  p.W2 = matrix_from_json(field(j, "W2"));
  p.b2 = vector_from(field(j, "b2"), "b2");
  p.W3 = matrix_from_json(field(j, "W3"));
  p.b3 = vector_from(field(j, "b3"), "b3");
  return GeneratorParams(std::move(p));
}

json epoch_record_to_json(const EpochRecord& rec) {
  json j{{"epoch", rec.epoch},
         {"loss_total", rec.loss_total},
         {"loss_obs", rec.loss_obs},
         {"loss_gp", rec.loss_gp},
         {"loss_sep", rec.loss_sep},
         {"ell", vector_json(rec.length_scales)},
         {"gp_energy", vector_json(rec.per_source_gp_energy)},
         {"monitor_corr", nullptr},
         {"monitor_per_pair", nullptr}};
  if (rec.monitor_corr) {
    j["monitor_corr"] = *rec.monitor_corr;
    j["monitor_per_pair"] = vector_json(rec.monitor_per_pair);
  }
  return j;
}

EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord rec;
  rec.epoch = field(j, "epoch").get<std::size_t>();
  rec.loss_total = field(j, "loss_total").get<double>();
  rec.loss_obs = field(j, "loss_obs").get<double>();
  rec.loss_gp = field(j, "loss_gp").get<double>();
  rec.loss_sep = field(j, "loss_sep").get<double>();
  rec.length_scales = vector_from(field(j, "ell"), "ell");
  rec.per_source_gp_energy = vector_from(field(j, "gp_energy"), "gp_energy");
  if (const auto& mc = field(j, "monitor_corr"); !mc.is_null()) {
    rec.monitor_corr = mc.get<double>();
    rec.monitor_per_pair = vector_from(field(j, "monitor_per_pair"), "monitor_per_pair");
  }
  return rec;
}

std::string write_checkpoint(const TrainConfig& config, const TrainState& state) {
  json gen_moments = json::array();
  for (const auto& m : state.optimizer.generator) gen_moments.push_back(moments_json(m));
  const json j{{"format", kCheckpointFormat},
               {"config", config_to_json(config)},
               {"epoch", state.epoch},
               {"S", matrix_to_json(state.S)},
               {"generator", generator_to_json(state.generator)},
               {"eta", vector_json(state.eta)},
               {"optimizer",
                {{"step", state.optimizer.step},
                 {"latents", moments_json(state.optimizer.latents)},
                 {"eta", moments_json(state.optimizer.eta)},
                 {"generator", gen_moments}}}};
  return j.dump(2) + "\n";
}

Checkpoint read_checkpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("checkpoint: ") + e.what());
  }
  if (field(j, "format").get<std::string>() != kCheckpointFormat)
    throw InvalidArgument("checkpoint: unsupported format");
  Checkpoint cp;
  cp.config = config_from_json(field(j, "config"));
  cp.config.validate();
  cp.state.epoch = field(j, "epoch").get<std::size_t>();
  cp.state.S = matrix_from_json(field(j, "S"));
  cp.state.generator = generator_from_json(field(j, "generator"));
  cp.state.eta = vector_from(field(j, "eta"), "eta");
  const json& opt = field(j, "optimizer");
  cp.state.optimizer.step = field(opt, "step").get<std::size_t>();
  cp.state.optimizer.latents = moments_from(field(opt, "latents"));
  cp.state.optimizer.eta = moments_from(field(opt, "eta"));
  for (const auto& m : field(opt, "generator")) cp.state.optimizer.generator.push_back(moments_from(m));
  return cp;
}

}  // namespace strebm
