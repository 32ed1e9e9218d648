#include "mspf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace mspf {
namespace {

std::string scale_tag(int d, int l) {
  return "[individual " + std::to_string(d) + "][scale " + std::to_string(l) + "]";
}

void check_covariance(const Matrix& cov, int dim, const std::string& name,
                      std::vector<std::string>& out) {
  if (cov.rows() != dim || cov.cols() != dim) {
    out.push_back(name + ": expected " + std::to_string(dim) + "x" + std::to_string(dim) +
                  " matrix");
    return;
  }
  if (!cov.allFinite()) {
    out.push_back(name + ": non-finite entry");
    return;
  }
  if (dim > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    out.push_back(name + ": not symmetric");
    return;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if (dim > 0 && eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    out.push_back(name + ": has a negative eigenvalue");
  }
}

Matrix matrix_from_json(const Json& node, const std::string& what) {
  if (!node.is_array()) throw ConfigError(what + ": expected a nested array");
  const auto rows = static_cast<Eigen::Index>(node.size());
  if (rows == 0) return Matrix(0, 0);
  if (!node[0].is_array()) throw ConfigError(what + ": expected a nested array");
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = node[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(what + ": ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& node, const std::string& what) {
  if (!node.is_array()) throw ConfigError(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
  return v;
}

Json vector_to_json(const Eigen::Ref<const Vector>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Matrix random_binary(int n, RngStream& rng) {
  Matrix a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = rng.uniform() < 0.5 ? 1.0 : 0.0;
  return a;
}

// Binary matrix that is strictly upper triangular under a random relabelling
// of the dimensions, hence nilpotent.
Matrix random_binary_acyclic(int n, RngStream& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.5) a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]) = 1.0;
  return a;
}

Matrix adjacency_from_json(const Json& node, int scale, int dim, std::uint64_t seed,
                           std::string& source) {
  if (node.is_array()) {
    source = "explicit";
    return matrix_from_json(node, "adjacency[" + std::to_string(scale) + "]");
  }
  if (!node.is_object() || !node.contains("generator")) {
    throw ConfigError("adjacency[" + std::to_string(scale) + "]: expected matrix or generator");
  }
  source = node.at("generator").get<std::string>();
  RngStream rng(StreamKey{seed, StreamPurpose::Structure, 0, static_cast<std::uint64_t>(scale), 0, 0});
  if (source == "random_binary") return random_binary(dim, rng);
  if (source == "random_binary_acyclic") return random_binary_acyclic(dim, rng);
  if (source == "zero") return Matrix::Zero(dim, dim);
  if (source == "identity") return Matrix::Identity(dim, dim);
  throw ConfigError("adjacency[" + std::to_string(scale) + "]: unknown generator '" + source + "'");
}

Matrix interaction_from_json(const Json& node, int individuals, std::uint64_t seed,
                             StructureProvenance& prov) {
  if (node.is_array()) {
    prov.interaction_source = "explicit";
    return matrix_from_json(node, "interaction");
  }
  if (!node.is_object() || !node.contains("generator")) {
    throw ConfigError("interaction: expected matrix or generator");
  }
  prov.interaction_source = node.at("generator").get<std::string>();
  Matrix b = Matrix::Identity(individuals, individuals);
  if (prov.interaction_source == "identity") return b;
  if (prov.interaction_source == "identity_plus_random_offdiagonal") {
    if (individuals < 2) return b;
    RngStream rng(StreamKey{seed, StreamPurpose::Structure, 1, 0, 0, 0});
    const auto slots = static_cast<std::uint64_t>(individuals) * static_cast<std::uint64_t>(individuals - 1);
    const auto k = static_cast<int>(rng() % slots);
    const int row = k / (individuals - 1);
    int col = k % (individuals - 1);
    if (col >= row) ++col;
    b(row, col) = 1.0;
    prov.interaction_offdiagonal = std::make_pair(row, col);
    return b;
  }
  throw ConfigError("interaction: unknown generator '" + prov.interaction_source + "'");
}

TransitionSpec transition_from_json(const Json& node) {
  TransitionSpec t;
  t.family = family_from_name(node.at("family").get<std::string>());
  t.amplitude = node.value("amplitude", t.amplitude);
  t.phase = node.value("phase", t.phase);
  t.frequency = node.value("frequency", t.frequency);
  t.decay = node.value("decay", t.decay);
  t.offset = node.value("offset", t.offset);
  t.adjacency_gain = node.value("adjacency_gain", t.adjacency_gain);
  t.window_gain = node.value("window_gain", t.window_gain);
  t.coarse_gain = node.value("coarse_gain", t.coarse_gain);
  t.neighbor_gain = node.value("neighbor_gain", t.neighbor_gain);
  return t;
}

Json transition_to_json(const TransitionSpec& t) {
  return Json{{"family", family_name(t.family)},
              {"amplitude", t.amplitude},
              {"phase", t.phase},
              {"frequency", t.frequency},
              {"decay", t.decay},
              {"offset", t.offset},
              {"adjacency_gain", t.adjacency_gain},
              {"window_gain", t.window_gain},
              {"coarse_gain", t.coarse_gain},
              {"neighbor_gain", t.neighbor_gain}};
}

template <typename T>
std::vector<T> list_of(const Json& doc, const char* key) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const auto& node = doc.at(key);
  if (!node.is_array()) throw ConfigError(std::string(key) + ": expected an array");
  return node.get<std::vector<T>>();
}

Json scaled_identity(double v, int n) { return matrix_to_json(v * Matrix::Identity(n, n)); }

Json simulation_document(const Json& schedule) {
  constexpr int kIndividuals = 6;
  constexpr int kDim = 3;
  const double coarse_process[kIndividuals] = {0.5, 0.4, 0.5, 0.7, 0.3, 0.4};
  Json process = Json::array();
  Json measure = Json::array();
  for (int d = 0; d < kIndividuals; ++d) {
    process.push_back(Json::array({scaled_identity(0.05, kDim), scaled_identity(coarse_process[d], kDim)}));
    measure.push_back(Json::array({scaled_identity(0.03, kDim), scaled_identity(0.02, kDim)}));
  }
  Json initial = Json::array();
  for (int d = 0; d < kIndividuals; ++d) initial.push_back(default_initial_state(d));

  TransitionSpec fine;
  fine.family = TransitionFamily::CosAdjacency;
  fine.amplitude = 1.0;
  fine.offset = 1.0;
  fine.window_gain = 0.0;
  fine.coarse_gain = 0.6;

  TransitionSpec oscillating;
  oscillating.family = TransitionFamily::Sine;
  oscillating.amplitude = 3.0;
  oscillating.phase = std::numbers::pi / 4.0;
  oscillating.window_gain = 1.0;
  oscillating.neighbor_gain = 0.5;
  oscillating.adjacency_gain = 0.3;

  TransitionSpec damped;
  damped.family = TransitionFamily::CosExpDecay;
  damped.amplitude = 2.0;
  damped.frequency = 1.2;
  damped.decay = 0.05;
  damped.window_gain = 1.0;
  damped.neighbor_gain = 1.0;
  damped.adjacency_gain = 0.5;

  return Json{
      {"num_scales", 2},
      {"num_individuals", kIndividuals},
      {"state_dims", {kDim, kDim}},
      {"horizons", {50, 100}},
      {"num_models", 2},
      {"process_noise", process},
      {"measurement_noise", measure},
      {"adjacency", Json::array({Json{{"generator", "random_binary"}},
                                 Json{{"generator", "random_binary_acyclic"}}})},
      {"interaction", Json{{"generator", "identity_plus_random_offdiagonal"}}},
      {"measurement_rotation", {0.0, 0.0}},
      {"dirichlet_alpha", {1.0, 1.0}},
      {"fine_summary_weights", Json::array({std::vector<double>(50, 1.0)})},
      {"initial_states", initial},
      {"seed", 20240901},
      {"transitions",
       Json{{"fine", Json::array({transition_to_json(fine)})},
            {"coarse", Json::array({transition_to_json(oscillating), transition_to_json(damped)})}}},
      {"schedule", schedule},
      {"filter", Json{{"num_particles", 1000}, {"degenerate_policy", "uniform"}, {"snapshot", false}}},
  };
}

}  // namespace

std::int64_t ScaleSystemConfig::steps_per_coarse_step(int scale) const {
  std::int64_t n = 1;
  for (int k = scale; k < num_scales - 1; ++k) n *= horizons.at(static_cast<std::size_t>(k));
  return n;
}

std::int64_t ScaleSystemConfig::total_steps(int scale) const {
  return steps_per_coarse_step(scale) * horizons.at(static_cast<std::size_t>(num_scales - 1));
}

double default_initial_state(int individual) {
  constexpr double kStarts[3] = {0.2, 0.5, 0.7};
  return kStarts[individual % 3];
}

std::string family_name(TransitionFamily family) {
  switch (family) {
    case TransitionFamily::Sine: return "sine";
    case TransitionFamily::CosExpDecay: return "cos_exp_decay";
    case TransitionFamily::CosAdjacency: return "cos_adjacency";
    case TransitionFamily::Linear: return "linear";
  }
  return "linear";
}

TransitionFamily family_from_name(const std::string& name) {
  if (name == "sine") return TransitionFamily::Sine;
  if (name == "cos_exp_decay") return TransitionFamily::CosExpDecay;
  if (name == "cos_adjacency") return TransitionFamily::CosAdjacency;
  if (name == "linear") return TransitionFamily::Linear;
  throw ConfigError("unknown transition family '" + name + "'");
}

std::vector<std::string> validate_config(const ScaleSystemConfig& c) {
  std::vector<std::string> out;
  const int L = c.num_scales;
  const int D = c.num_individuals;
  if (L < 1) out.push_back("num_scales: must be >= 1");
  if (D < 1) out.push_back("num_individuals: must be >= 1");
  if (c.num_models < 1) out.push_back("num_models: must be >= 1");
  if (L < 1 || D < 1) return out;

  bool shapes_ok = true;
  if (static_cast<int>(c.state_dims.size()) != L) {
    out.push_back("state_dims: expected one entry per scale");
    shapes_ok = false;
  } else {
    for (int l = 0; l < L; ++l)
      if (c.state_dims[l] < 1) {
        out.push_back("state_dims[" + std::to_string(l) + "]: must be >= 1");
        shapes_ok = false;
      }
  }
  if (static_cast<int>(c.horizons.size()) != L) {
    out.push_back("horizons: expected one entry per scale");
  } else {
    for (int l = 0; l < L; ++l)
      if (c.horizons[l] < 1) out.push_back("horizons[" + std::to_string(l) + "]: must be >= 1");
  }

  if (shapes_ok) {
    for (const auto* noise : {&c.process_noise, &c.measurement_noise}) {
      const std::string name = noise == &c.process_noise ? "process_noise" : "measurement_noise";
      if (static_cast<int>(noise->size()) != D) {
        out.push_back(name + ": expected one entry per individual");
        continue;
      }
      for (int d = 0; d < D; ++d) {
        if (static_cast<int>((*noise)[d].size()) != L) {
          out.push_back(name + "[individual " + std::to_string(d) + "]: expected one matrix per scale");
          continue;
        }
        for (int l = 0; l < L; ++l) check_covariance((*noise)[d][l], c.state_dims[l], name + scale_tag(d, l), out);
      }
    }
    if (static_cast<int>(c.adjacency.size()) != L) {
      out.push_back("adjacency: expected one matrix per scale");
    } else {
      for (int l = 0; l < L; ++l)
        if (c.adjacency[l].rows() != c.state_dims[l] || c.adjacency[l].cols() != c.state_dims[l] ||
            !c.adjacency[l].allFinite())
          out.push_back("adjacency[" + std::to_string(l) + "]: expected finite N_l x N_l matrix");
    }
    if (static_cast<int>(c.measurement_rotation.size()) != L) {
      out.push_back("measurement_rotation: expected one angle per scale");
    } else {
      for (int l = 0; l < L; ++l) {
        if (!std::isfinite(c.measurement_rotation[l]))
          out.push_back("measurement_rotation[" + std::to_string(l) + "]: not finite");
        else if (c.measurement_rotation[l] != 0.0 && c.state_dims[l] < 2)
          out.push_back("measurement_rotation[" + std::to_string(l) + "]: needs at least 2 dimensions");
      }
    }
    if (L == static_cast<int>(c.horizons.size())) {
      if (static_cast<int>(c.fine_summary_weights.size()) != L - 1) {
        out.push_back("fine_summary_weights: expected one vector per fine scale");
      } else {
        for (int l = 0; l + 1 < L; ++l) {
          const auto& w = c.fine_summary_weights[l];
          const std::string name = "fine_summary_weights[" + std::to_string(l) + "]";
          if (w.size() != c.horizons[l]) out.push_back(name + ": expected length T_l");
          else if ((w.array() < 0.0).any() || !w.allFinite()) out.push_back(name + ": entries must be >= 0");
          else if (!(w.sum() > 0.0)) out.push_back(name + ": sum must be positive");
        }
      }
    }
  }

  if (c.interaction.rows() != D || c.interaction.cols() != D || !c.interaction.allFinite())
    out.push_back("interaction: expected finite D x D matrix");
  if (c.dirichlet_alpha.size() != c.num_models) {
    out.push_back("dirichlet_alpha: expected one entry per model");
  } else {
    for (Eigen::Index m = 0; m < c.dirichlet_alpha.size(); ++m)
      if (!(c.dirichlet_alpha[m] > 0.0) || !std::isfinite(c.dirichlet_alpha[m])) {
        out.push_back("dirichlet_alpha: entries must be strictly positive");
        break;
      }
  }
  if (static_cast<int>(c.initial_states.size()) != D)
    out.push_back("initial_states: expected one value per individual");
  if (static_cast<int>(c.fine_transitions.size()) != L - 1)
    out.push_back("transitions.fine: expected one spec per fine scale");
  if (static_cast<int>(c.coarse_models.size()) != c.num_models)
    out.push_back("transitions.coarse: expected one spec per model");

  // cross-scale coupling adds vectors of adjacent scales, so dims must agree
  if (shapes_ok && static_cast<int>(c.fine_transitions.size()) == L - 1) {
    for (int l = 0; l + 1 < L; ++l) {
      if (c.state_dims[l] == c.state_dims[l + 1]) continue;
      const std::string pair = std::to_string(l) + "/" + std::to_string(l + 1);
      if (c.fine_transitions[l].coarse_gain != 0.0)
        out.push_back("state_dims[" + pair + "]: coarse coupling needs equal dimensions");
      if (l + 1 < L - 1 && c.fine_transitions[l + 1].window_gain != 0.0)
        out.push_back("state_dims[" + pair + "]: window coupling needs equal dimensions");
      if (l + 1 == L - 1)
        for (const auto& m : c.coarse_models)
          if (m.window_gain != 0.0) {
            out.push_back("state_dims[" + pair + "]: window coupling needs equal dimensions");
            break;
          }
    }
  }
  return out;
}

std::vector<std::string> validate_schedule(const ScaleSystemConfig& c, const RegimeSchedule& s) {
  std::vector<std::string> out;
  if (s.num_individuals() != c.num_individuals) {
    out.push_back("schedule: expected one row per individual");
    return out;
  }
  const int horizon = c.horizons.empty() ? 0 : c.horizons.back();
  for (int d = 0; d < s.num_individuals(); ++d) {
    const auto& row = s.models[static_cast<std::size_t>(d)];
    if (static_cast<int>(row.size()) != horizon) {
      out.push_back("schedule[" + std::to_string(d) + "]: does not cover every coarse step");
      continue;
    }
    for (int m : row)
      if (m < 0 || m >= c.num_models || m >= static_cast<int>(c.coarse_models.size())) {
        out.push_back("schedule[" + std::to_string(d) + "]: model index out of range");
        break;
      }
  }
  return out;
}

Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ScaleSystemConfig config_from_json(const Json& doc, std::optional<std::uint64_t> seed) try {
  ScaleSystemConfig c;
  c.num_scales = doc.at("num_scales").get<int>();
  c.num_individuals = doc.at("num_individuals").get<int>();
  c.state_dims = list_of<int>(doc, "state_dims");
  c.horizons = list_of<int>(doc, "horizons");
  c.num_models = doc.at("num_models").get<int>();
  c.seed = seed ? *seed : doc.at("seed").get<std::uint64_t>();

  for (const char* key : {"process_noise", "measurement_noise"}) {
    auto& target = std::string(key) == "process_noise" ? c.process_noise : c.measurement_noise;
    const auto& node = doc.at(key);
    if (!node.is_array()) throw ConfigError(std::string(key) + ": expected an array");
    for (std::size_t d = 0; d < node.size(); ++d) {
      std::vector<Matrix> per_scale;
      for (std::size_t l = 0; l < node[d].size(); ++l)
        per_scale.push_back(matrix_from_json(node[d][l], std::string(key) + scale_tag(static_cast<int>(d), static_cast<int>(l))));
      target.push_back(std::move(per_scale));
    }
  }

  const auto& adjacency = doc.at("adjacency");
  if (!adjacency.is_array()) throw ConfigError("adjacency: expected an array");
  for (std::size_t l = 0; l < adjacency.size(); ++l) {
    const int dim = l < c.state_dims.size() ? c.state_dims[l] : 0;
    std::string source;
    c.adjacency.push_back(adjacency_from_json(adjacency[l], static_cast<int>(l), dim, c.seed, source));
    c.provenance.adjacency_source.push_back(source);
  }
  c.interaction = interaction_from_json(doc.at("interaction"), c.num_individuals, c.seed, c.provenance);
  c.measurement_rotation = doc.contains("measurement_rotation")
                               ? list_of<double>(doc, "measurement_rotation")
                               : std::vector<double>(static_cast<std::size_t>(std::max(c.num_scales, 0)), 0.0);

  c.dirichlet_alpha = doc.contains("dirichlet_alpha")
                          ? vector_from_json(doc.at("dirichlet_alpha"), "dirichlet_alpha")
                          : Vector::Ones(std::max(c.num_models, 0));
  if (doc.contains("fine_summary_weights")) {
    for (const auto& w : doc.at("fine_summary_weights"))
      c.fine_summary_weights.push_back(vector_from_json(w, "fine_summary_weights"));
  } else {
    for (int l = 0; l + 1 < c.num_scales && l < static_cast<int>(c.horizons.size()); ++l)
      c.fine_summary_weights.push_back(Vector::Ones(c.horizons[l]));
  }
  if (doc.contains("initial_states")) {
    c.initial_states = list_of<double>(doc, "initial_states");
  } else {
    for (int d = 0; d < c.num_individuals; ++d) c.initial_states.push_back(default_initial_state(d));
  }

  const auto& transitions = doc.at("transitions");
  for (const auto& t : transitions.value("fine", Json::array())) c.fine_transitions.push_back(transition_from_json(t));
  for (const auto& t : transitions.at("coarse")) c.coarse_models.push_back(transition_from_json(t));
  return c;
} catch (const Json::exception& e) {
  throw ConfigError(std::string("config: ") + e.what());
}

Json config_to_json(const ScaleSystemConfig& c) {
  Json process = Json::array();
  Json measure = Json::array();
  for (const auto& per_scale : c.process_noise) {
    Json row = Json::array();
    for (const auto& m : per_scale) row.push_back(matrix_to_json(m));
    process.push_back(std::move(row));
  }
  for (const auto& per_scale : c.measurement_noise) {
    Json row = Json::array();
    for (const auto& m : per_scale) row.push_back(matrix_to_json(m));
    measure.push_back(std::move(row));
  }
  Json adjacency = Json::array();
  for (const auto& a : c.adjacency) adjacency.push_back(matrix_to_json(a));
  Json weights = Json::array();
  for (const auto& w : c.fine_summary_weights) weights.push_back(vector_to_json(w));
  Json fine = Json::array();
  for (const auto& t : c.fine_transitions) fine.push_back(transition_to_json(t));
  Json coarse = Json::array();
  for (const auto& t : c.coarse_models) coarse.push_back(transition_to_json(t));
  return Json{
      {"num_scales", c.num_scales},
      {"num_individuals", c.num_individuals},
      {"state_dims", c.state_dims},
      {"horizons", c.horizons},
      {"num_models", c.num_models},
      {"process_noise", process},
      {"measurement_noise", measure},
      {"adjacency", adjacency},
      {"interaction", matrix_to_json(c.interaction)},
      {"measurement_rotation", c.measurement_rotation},
      {"dirichlet_alpha", vector_to_json(c.dirichlet_alpha)},
      {"fine_summary_weights", weights},
      {"initial_states", c.initial_states},
      {"seed", c.seed},
      {"transitions", Json{{"fine", fine}, {"coarse", coarse}}},
  };
}

Json sim1_document() { return simulation_document(Json{{"preset", "sim1"}}); }
Json sim2_document() { return simulation_document(Json{{"preset", "sim2"}}); }

}  // namespace mspf
