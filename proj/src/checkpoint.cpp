#include "reynet/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "reynet/error.hpp"

namespace reynet {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(FormatError::Kind::malformed, "checkpoint: bad number '" + s + "'");
  return v;
}

json shape_json(const TensorShape& s) { return {{"n", s.n}, {"order", s.order}, {"channels", s.channels}}; }

TensorShape shape_from(const json& j) {
  return {j.at("n").get<int>(), j.at("order").get<int>(), j.at("channels").get<int>()};
}

json mlp_json(const MLPParams& p) {
  json values = json::array();
  for (double v : p.flatten()) values.push_back(format_double(v));
  return {{"dims", p.dims}, {"values", values}};
}

MLPParams mlp_from(const json& j) {
  auto p = MLPParams::zeros(j.at("dims").get<std::vector<int>>());
  std::vector<double> values;
  for (const auto& v : j.at("values")) values.push_back(parse_double(v.get<std::string>()));
  if (values.size() != p.parameter_count())
    throw FormatError(FormatError::Kind::malformed, "checkpoint: parameter count does not match dims");
  p.unflatten(values);
  return p;
}

json body_json(const EquivariantReyNet& m) {
  const auto& s = m.shape();
  json j{{"shape",
          {{"n", s.n}, {"in_order", s.in_order}, {"in_channels", s.in_channels}, {"out_order", s.out_order},
           {"out_channels", s.out_channels}}},
         {"reduced", nullptr},
         {"components", json::array()}};
  if (m.reduced()) j["reduced"] = {{"coords", m.reduced()->coords}, {"restrict_to_depth", m.reduced()->restrict_to_depth}};
  for (const auto& p : m.components()) j["components"].push_back(mlp_json(p));
  return j;
}

EquivariantReyNet body_from(const json& j) {
  const auto& s = j.at("shape");
  const ReyNetShape shape{s.at("n").get<int>(), s.at("in_order").get<int>(), s.at("in_channels").get<int>(),
                          s.at("out_order").get<int>(), s.at("out_channels").get<int>()};
  std::optional<ReducedSpec> reduced;
  if (!j.at("reduced").is_null())
    reduced = ReducedSpec{j.at("reduced").at("coords").get<std::vector<std::vector<int>>>(),
                          j.at("reduced").at("restrict_to_depth").get<bool>()};
  std::vector<MLPParams> components;
  for (const auto& c : j.at("components")) components.push_back(mlp_from(c));
  return EquivariantReyNet(shape, std::move(reduced), std::move(components));
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ck) {
  const auto& m = ck.meta;
  json doc{{"format", "reynet-checkpoint"},
           {"version", kFormatVersion},
           {"kind", to_string(ck.network.kind())},
           {"task", to_string(m.task)},
           {"seed", m.seed},
           {"hyperparameters",
            {{"lr", format_double(m.adam.lr)},
             {"weight_decay", format_double(m.adam.weight_decay)},
             {"beta1", format_double(m.adam.beta1)},
             {"beta2", format_double(m.adam.beta2)},
             {"eps", format_double(m.adam.eps)},
             {"epochs", m.epochs},
             {"batch", m.batch},
             {"loss", to_string(m.loss)},
             {"n_train", m.n_train},
             {"hidden", m.options.hidden},
             {"body_channels", m.options.body_channels},
             {"pooling", to_string(m.options.pooling)},
             {"stab_restricted", m.options.stab_restricted}}}};
  std::visit(
      [&doc](const auto& net) {
        using T = std::decay_t<decltype(net)>;
        if constexpr (std::is_same_v<T, FnnModel>) {
          doc["model"] = {{"input", shape_json(net.input)}, {"output", shape_json(net.output)}, {"mlp", mlp_json(net.mlp)}};
        } else if constexpr (std::is_same_v<T, EquivariantReyNet>) {
          doc["model"] = {{"body", body_json(net)}};
        } else {
          doc["model"] = {{"body", body_json(net.body)}, {"pooling", to_string(net.pooling)}, {"head", mlp_json(net.head)}};
        }
      },
      ck.network.model());
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "reynet-checkpoint")
      throw FormatError(FormatError::Kind::bad_magic, "not a reynet checkpoint");
    if (doc.at("version").get<int>() != kFormatVersion)
      throw FormatError(FormatError::Kind::version_mismatch, "unsupported checkpoint version");
    const ModelKind kind = model_kind_from_string(doc.at("kind").get<std::string>());
    const auto& h = doc.at("hyperparameters");
    TrainingMeta meta;
    meta.task = task_from_string(doc.at("task").get<std::string>());
    meta.seed = doc.at("seed").get<std::uint64_t>();
    meta.adam = AdamConfig{parse_double(h.at("lr").get<std::string>()), parse_double(h.at("weight_decay").get<std::string>()),
                           parse_double(h.at("beta1").get<std::string>()), parse_double(h.at("beta2").get<std::string>()),
                           parse_double(h.at("eps").get<std::string>())};
    meta.epochs = h.at("epochs").get<int>();
    meta.batch = h.at("batch").get<int>();
    meta.loss = loss_kind_from_string(h.at("loss").get<std::string>());
    meta.n_train = h.at("n_train").get<std::size_t>();
    meta.options.hidden = h.at("hidden").get<std::vector<int>>();
    meta.options.body_channels = h.at("body_channels").get<int>();
    meta.options.pooling = pooling_from_string(h.at("pooling").get<std::string>());
    meta.options.stab_restricted = h.at("stab_restricted").get<bool>();

    const auto& m = doc.at("model");
    Network::Model model = [&]() -> Network::Model {
      switch (kind) {
        case ModelKind::fnn: {
          FnnModel f{shape_from(m.at("input")), shape_from(m.at("output")), mlp_from(m.at("mlp"))};
          if (f.mlp.input_dim() != static_cast<int>(int_pow(f.input.n, f.input.order)) * f.input.channels ||
              f.mlp.output_dim() != static_cast<int>(int_pow(f.output.n, f.output.order)) * f.output.channels)
            throw FormatError(FormatError::Kind::malformed, "checkpoint: FNN widths do not match its shapes");
          return f;
        }
        case ModelKind::reynet:
        case ModelKind::red_reynet: return body_from(m.at("body"));
        case ModelKind::inv_reynet:
        case ModelKind::inv_red_reynet: {
          InvariantReyNet inv{body_from(m.at("body")), pooling_from_string(m.at("pooling").get<std::string>()),
                              mlp_from(m.at("head"))};
          const auto& s = inv.body.shape();
          if (inv.head.input_dim() != pooled_width(inv.pooling, s.out_order, s.out_channels))
            throw FormatError(FormatError::Kind::malformed, "checkpoint: head width does not match pooling");
          return inv;
        }
      }
      throw FormatError(FormatError::Kind::malformed, "checkpoint: unknown kind");
    }();
    return Checkpoint{Network(kind, std::move(model)), meta};
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::malformed, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const std::string text = checkpoint_to_string(ck);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw FormatError(FormatError::Kind::io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace reynet
