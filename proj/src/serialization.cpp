#include "gne/serialization.hpp"

#include "gne/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gne {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(std::move(row));
  }
  return a;
}

Vec vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(what + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

Mat mat_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + ": expected a row-major nested array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec row = vec_from_json(j[r], what);
    if (row.size() != cols) throw ConfigError(what + ": ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json game_to_json(const GameModel& game) {
  json players = json::array();
  for (int i = 0; i < game.num_players(); ++i) {
    const PlayerSpec& p = game.player(i);
    const auto* quad = std::get_if<QuadraticCost>(&p.cost);
    if (!quad) throw UnsupportedError("only quadratic costs can be serialized");
    players.push_back({{"dim", p.dim()},
                       {"lower", to_json(p.lower)},
                       {"upper", to_json(p.upper)},
                       {"A_i", to_json(p.coupling_block)},
                       {"b_i", to_json(p.coupling_offset)},
                       {"Q_i", to_json(quad->Q)},
                       {"q_i", to_json(quad->q)}});
  }
  json j{{"players", players}, {"b", to_json(game.b())}, {"m", game.num_constraints()}};
  if (game.price()) j["price"] = {{"Pbar", to_json(game.price()->pbar)}, {"D", to_json(game.price()->slope)}};
  return j;
}

GameModel game_from_json(const json& j) {
  const json& players_j = field(j, "players", "game");
  if (!players_j.is_array() || players_j.empty()) throw ConfigError("game: players must be a nonempty array");
  const Vec b = vec_from_json(field(j, "b", "game"), "game.b");
  const int m = get_or<int>(j, "m", static_cast<int>(b.size()));
  if (m != b.size()) throw ConfigError("game: m does not match the length of b");

  std::vector<PlayerSpec> players;
  for (std::size_t i = 0; i < players_j.size(); ++i) {
    const json& pj = players_j[i];
    const std::string where = "game.players[" + std::to_string(i) + "]";
    PlayerSpec p;
    p.lower = vec_from_json(field(pj, "lower", where), where + ".lower");
    p.upper = vec_from_json(field(pj, "upper", where), where + ".upper");
    const int dim = get_or<int>(pj, "dim", static_cast<int>(p.lower.size()));
    if (dim != p.lower.size()) throw ConfigError(where + ": dim does not match the bounds");
    p.coupling_block = m > 0 ? mat_from_json(field(pj, "A_i", where), where + ".A_i") : Mat(0, dim);
    if (p.coupling_block.size() == 0) p.coupling_block.resize(m, dim);
    p.coupling_offset = pj.contains("b_i") ? vec_from_json(pj["b_i"], where + ".b_i") : Vec(b / players_j.size());
    QuadraticCost cost;
    const json& Qj = field(pj, "Q_i", where);
    // A flat array is read as the diagonal.
    cost.Q = (Qj.is_array() && !Qj.empty() && Qj[0].is_number())
                 ? Mat(vec_from_json(Qj, where + ".Q_i").asDiagonal())
                 : mat_from_json(Qj, where + ".Q_i");
    cost.q = vec_from_json(field(pj, "q_i", where), where + ".q_i");
    p.cost = std::move(cost);
    players.push_back(std::move(p));
  }
  std::optional<PriceModel> price;
  if (j.contains("price") && !j["price"].is_null()) {
    const json& pr = j["price"];
    PriceModel pm;
    pm.pbar = vec_from_json(field(pr, "Pbar", "game.price"), "game.price.Pbar");
    const json& Dj = field(pr, "D", "game.price");
    pm.slope = (Dj.is_array() && !Dj.empty() && Dj[0].is_number()) ? Mat(vec_from_json(Dj, "game.price.D").asDiagonal())
                                                                   : mat_from_json(Dj, "game.price.D");
    price = std::move(pm);
  }
  try {
    return GameModel(std::move(players), b, std::move(price));
  } catch (const DimensionError& e) {
    throw ConfigError(std::string("game: ") + e.what());
  }
}

json graph_to_json(const CommGraph& graph) {
  json edges = json::array();
  for (const auto& e : graph.edges()) edges.push_back({e.head + 1, e.tail + 1});
  return {{"N", graph.num_nodes()}, {"edges", edges}};
}

CommGraph graph_from_json(const json& j) {
  const int N = field(j, "N", "graph").get<int>();
  std::vector<Edge> edges;
  for (const auto& e : field(j, "edges", "graph")) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("graph: each edge is a pair [i, j]");
    edges.push_back({e[0].get<int>() - 1, e[1].get<int>() - 1});
  }
  return CommGraph::build(N, std::move(edges));
}

json schedule_to_json(const AsyncSchedule& s) {
  return {{"p", to_json(s.p)},
          {"seed", s.seed},
          {"phi_bar", s.phi_bar},
          {"delay_model", to_string(s.delay_model)},
          {"fairness_window", s.fairness_window},
          {"activation", to_string(s.activation)},
          {"stale_own_reads", s.stale_own_reads}};
}

AsyncSchedule schedule_from_json(const json& j, int num_agents) {
  if (!j.is_object()) throw ConfigError("schedule must be an object");
  AsyncSchedule s = AsyncSchedule::uniform(num_agents, get_or<std::uint64_t>(j, "seed", 0),
                                           get_or<int>(j, "phi_bar", 0));
  if (j.contains("p")) s.p = vec_from_json(j["p"], "schedule.p");
  s.delay_model = delay_model_from_string(get_or<std::string>(j, "delay_model", "uniform_iid"));
  s.activation = activation_from_string(get_or<std::string>(j, "activation", "random"));
  s.fairness_window = get_or<int>(j, "fairness_window", 0);
  s.stale_own_reads = get_or<bool>(j, "stale_own_reads", true);
  s.validate(num_agents);
  return s;
}

json params_to_json(const SolverParams& p) {
  return {{"tau", to_json(p.tau)}, {"delta", p.delta}, {"eps", to_json(p.eps)}, {"eta", p.eta}, {"theta", p.theta}};
}

SolverParams params_from_json(const json& j) {
  SolverParams p;
  p.tau = vec_from_json(field(j, "tau", "params"), "params.tau");
  p.eps = vec_from_json(field(j, "eps", "params"), "params.eps");
  p.delta = field(j, "delta", "params").get<double>();
  p.eta = field(j, "eta", "params").get<double>();
  p.theta = field(j, "theta", "params").get<double>();
  return p;
}

json validation_to_json(const ValidationReport& r) {
  return {{"alpha", r.alpha},
          {"ell", r.ell},
          {"theta", r.theta},
          {"theta_lower", r.theta_lower},
          {"phi_min_eigenvalue", r.phi_min_eigenvalue},
          {"eta_max_sync", r.eta_max_sync},
          {"theta_ok", r.theta_ok},
          {"phi_pd", r.phi_pd},
          {"phi_psd", r.phi_psd},
          {"eta_ok", r.eta_ok},
          {"failures", r.failures}};
}

json kkt_to_json(const KktBreakdown& k) {
  return {{"stationarity", k.stationarity},
          {"primal", k.primal},
          {"complementarity", k.complementarity},
          {"dual", k.dual},
          {"max", k.max()}};
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "k,fp_residual,kkt_residual,consensus_residual,max_violation,normalized_distance,disagreement,avg_violation\n";
  for (const auto& r : trace.records) {
    os << r.k << ',' << format_double(r.fp_residual) << ',' << format_double(r.kkt_residual) << ','
       << format_double(r.consensus_residual) << ',' << format_double(r.max_violation) << ','
       << format_double(r.normalized_distance) << ',' << format_double(r.disagreement) << ','
       << format_double(r.avg_violation) << '\n';
  }
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

json event_to_json(const AsyncEvent& ev, bool with_mu) {
  json j{{"k", ev.k},
         {"agent", ev.agent + 1},
         {"staleness_map", ev.staleness},
         {"committed_norms", {{"x", ev.x_norm}, {"lambda", ev.lambda_norm}, {"aux", ev.aux_norm}}}};
  if (with_mu) {
    j["mu_read"] = to_json(ev.mu_read);
    json deltas = json::array();
    for (const auto& [agent, d] : ev.mu_deltas) deltas.push_back({{"agent", agent + 1}, {"delta", to_json(d)}});
    j["mu_deltas"] = std::move(deltas);
  }
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace gne
