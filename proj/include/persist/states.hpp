#ifndef PERSIST_STATES_HPP
#define PERSIST_STATES_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "persist/errors.hpp"
#include "persist/linalg.hpp"
#include "persist/state.hpp"

namespace persist {

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Undirected simple graph on vertices 0..n-1.
class Graph {
 public:
  Graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>&
                           edge_list)
      : n_(n) {
    if (n == 0) throw ParameterOutOfRange("graph needs >= 1 vertex");
    for (auto [u, v] : edge_list) {
      if (u >= n || v >= n) throw ParameterOutOfRange("edge vertex out of range");
      if (u == v) throw ParameterOutOfRange("self-loop");
      edges_.insert({std::min(u, v), std::max(u, v)});
    }
  }

  static Graph path(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return Graph(n, e);
  }

  static Graph cycle(std::size_t n) {
    auto g = path(n);
    if (n >= 3) g.edges_.insert({0, n - 1});
    if (n == 2) g.edges_.insert({0, 1});
    return g;
  }

  /// Row-major grid, optional wrap-around on both axes.
  static Graph grid(std::size_t rows, std::size_t cols, bool periodic) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (c + 1 < cols) e.push_back({id(r, c), id(r, c + 1)});
        if (r + 1 < rows) e.push_back({id(r, c), id(r + 1, c)});
        if (periodic && cols > 2 && c == cols - 1) e.push_back({id(r, c), id(r, 0)});
        if (periodic && rows > 2 && r == rows - 1) e.push_back({id(r, c), id(0, c)});
      }
    // wrap on an axis of length 2 duplicates an existing edge; CZ^2 = I,
    // so a duplicate must be dropped, which the edge set already does
    if (periodic && cols == 2)
      for (std::size_t r = 0; r < rows; ++r) e.push_back({id(r, 0), id(r, 1)});
    if (periodic && rows == 2)
      for (std::size_t c = 0; c < cols; ++c) e.push_back({id(0, c), id(1, c)});
    return Graph(rows * cols, e);
  }

  std::size_t vertices() const { return n_; }
  const std::set<std::pair<std::size_t, std::size_t>>& edges() const {
    return edges_;
  }
  std::vector<std::size_t> neighbors(std::size_t v) const {
    std::vector<std::size_t> out;
    for (auto [a, b] : edges_) {
      if (a == v) out.push_back(b);
      if (b == v) out.push_back(a);
    }
    return out;
  }

 private:
  std::size_t n_;
  std::set<std::pair<std::size_t, std::size_t>> edges_;
};

// ---------------------------------------------------------------------------
// State families
// ---------------------------------------------------------------------------

/// Controlled-Z on |+>^n along every edge. Stabilized by X_v prod_{u~v} Z_u.
inline StateVector graph_state(const Graph& g) {
  const std::size_t n = g.vertices();
  const long dim = 1L << n;
  Vector amps(dim);
  const double amp = std::pow(2.0, -0.5 * static_cast<double>(n));
  for (long x = 0; x < dim; ++x) {
    int sign = 0;
    for (auto [u, v] : g.edges())
      sign ^= static_cast<int>((x >> (n - 1 - u)) & (x >> (n - 1 - v)) & 1);
    amps(x) = sign ? -amp : amp;
  }
  return StateVector(QuditRegister::uniform(n, 2), amps);
}

inline StateVector linear_cluster(std::size_t n) {
  return graph_state(Graph::path(n));
}
inline StateVector ring_cluster(std::size_t n) {
  return graph_state(Graph::cycle(n));
}
inline StateVector grid_cluster(std::size_t rows, std::size_t cols,
                                bool periodic) {
  return graph_state(Graph::grid(rows, cols, periodic));
}

/// Uniform superposition of all weight-m length-N bitstrings.
inline StateVector dicke_state(std::size_t n, std::size_t m) {
  if (n < 1 || m > n) throw ParameterOutOfRange("dicke: need 0 <= m <= N");
  const long dim = 1L << n;
  Vector amps = Vector::Zero(dim);
  long count = 0;
  for (long x = 0; x < dim; ++x)
    if (static_cast<std::size_t>(__builtin_popcountll(x)) == m) {
      amps(x) = 1.0;
      ++count;
    }
  amps /= std::sqrt(static_cast<double>(count));
  return StateVector(QuditRegister::uniform(n, 2), amps);
}

inline StateVector w_state(std::size_t n) {
  if (n < 2) throw ParameterOutOfRange("w_state: need N >= 2");
  return dicke_state(n, 1);
}

/// Uniform superposition over the N cyclic shifts of |0..01..1> (m ones).
inline StateVector translational_state(std::size_t n, std::size_t m) {
  if (m < 1 || m + 1 > n)
    throw ParameterOutOfRange("ti: need 1 <= m <= N-1");
  const long dim = 1L << n;
  Vector amps = Vector::Zero(dim);
  long ref = (1L << m) - 1;  // |0^{N-m} 1^m>
  const long mask = dim - 1;
  long x = ref;
  for (std::size_t k = 0; k < n; ++k) {
    amps(x) = 1.0;
    x = ((x << 1) | (x >> (n - 1))) & mask;  // cyclic shift
  }
  amps /= std::sqrt(static_cast<double>(n));
  return StateVector(QuditRegister::uniform(n, 2), amps);
}

inline StateVector ghz_state(std::size_t n, int d = 2) {
  if (n < 2 || d < 2) throw ParameterOutOfRange("ghz: need N >= 2, d >= 2");
  QuditRegister reg = QuditRegister::uniform(n, d);
  Vector amps = Vector::Zero(reg.total_dimension());
  const auto strides = site_strides(reg.dims());
  for (int j = 0; j < d; ++j) {
    long idx = 0;
    for (auto s : strides) idx += j * s;
    amps(idx) = 1.0 / std::sqrt(static_cast<double>(d));
  }
  return StateVector(reg, amps);
}

inline StateVector bell_state() { return ghz_state(2, 2); }

inline double psi_b_from_theta(double theta, long terms_d = 3) {
  const double s2 = std::sin(theta) * std::sin(theta);
  return std::sqrt(s2 / (1.0 + (terms_d - 1) * s2));
}
inline double psi_theta_from_b(double b, long terms_d = 3) {
  const double b2 = b * b;
  return std::asin(std::sqrt(b2 / (1.0 - (terms_d - 1) * b2)));
}

/// Odd-N, d=N translationally invariant family
///   a|0..0> + b sum of cyclic shifts of (N-1)/2 seed strings,
/// each seed carrying two nonzero symbols. 1 + N(N-1)/2 nonzero amplitudes.
inline StateVector psi_max_persistency(std::size_t n, double b) {
  if (n < 3 || n % 2 == 0)
    throw ParameterOutOfRange("psi: need odd N >= 3");
  const long terms_d = static_cast<long>(n) * (static_cast<long>(n) - 1) / 2;
  const double a2 = 1.0 - terms_d * b * b;
  if (b < 0.0 || a2 < 0.0)
    throw InvalidAmplitude("psi: need 0 <= b <= 1/sqrt(N(N-1)/2)");
  QuditRegister reg = QuditRegister::uniform(n, static_cast<int>(n));
  const auto strides = site_strides(reg.dims());
  Vector amps = Vector::Zero(reg.total_dimension());
  amps(0) = std::sqrt(a2);
  // seed delta: symbol 2*delta-1 at site N-1-delta, symbol 2*delta at N-1
  for (std::size_t delta = 1; delta <= (n - 1) / 2; ++delta) {
    std::vector<int> s(n, 0);
    s[n - 1 - delta] = static_cast<int>(2 * delta - 1);
    s[n - 1] = static_cast<int>(2 * delta);
    for (std::size_t shift = 0; shift < n; ++shift) {
      long idx = 0;
      for (std::size_t i = 0; i < n; ++i) idx += s[(i + n - shift) % n] * strides[i];
      amps(idx) = b;
    }
  }
  return StateVector(reg, amps / amps.norm());
}

/// The translationally invariant 4-ququart state given to 4 printed digits;
/// the raw coefficients are renormalized.
inline StateVector psi4_appendix() {
  QuditRegister reg = QuditRegister::uniform(4, 4);
  Vector amps = Vector::Zero(reg.total_dimension());
  auto idx = [](int a, int b, int c, int d) {
    return ((a * 4 + b) * 4 + c) * 4 + d;
  };
  for (auto [a, b, c, d] : {std::array<int, 4>{0, 1, 1, 2},
                            std::array<int, 4>{1, 1, 2, 0},
                            std::array<int, 4>{1, 2, 0, 1},
                            std::array<int, 4>{2, 0, 1, 1}})
    amps(idx(a, b, c, d)) = 0.3039;
  amps(idx(0, 2, 0, 2)) = 0.2566;
  amps(idx(2, 0, 2, 0)) = 0.2566;
  amps(idx(1, 3, 1, 3)) = -0.3033;
  amps(idx(3, 1, 3, 1)) = -0.3033;
  amps(idx(1, 1, 1, 1)) = 0.4783;
  amps(idx(3, 3, 3, 3)) = 0.2563;
  return StateVector(reg, amps / amps.norm());
}

/// N parties, each pair sharing a 2-qubit Bell pair; local dimension 2^{N-1}.
inline StateVector fully_connected_bell(std::size_t n) {
  if (n < 2) throw ParameterOutOfRange("fcbell: need N >= 2");
  if (n > 5)
    throw DimensionBudgetExceeded("fcbell: local dimension 2^(N-1) too large");
  const int local_dim = 1 << (n - 1);
  QuditRegister reg = QuditRegister::uniform(n, local_dim);
  // party i's local qubits are ordered by partner index ascending; qubit
  // slot of partner j at party i:
  auto slot = [n](std::size_t i, std::size_t j) {
    std::size_t s = j < i ? j : j - 1;
    return static_cast<int>(n - 2 - s);  // partner 0 most significant
  };
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
  const auto strides = site_strides(reg.dims());
  Vector amps = Vector::Zero(reg.total_dimension());
  const double amp = std::pow(2.0, -0.5 * static_cast<double>(pairs.size()));
  for (long bits = 0; bits < (1L << pairs.size()); ++bits) {
    std::vector<int> local(n, 0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const int b = static_cast<int>((bits >> p) & 1);
      auto [i, j] = pairs[p];
      local[i] |= b << slot(i, j);
      local[j] |= b << slot(j, i);
    }
    long idx = 0;
    for (std::size_t i = 0; i < n; ++i) idx += local[i] * strides[i];
    amps(idx) = amp;
  }
  return StateVector(reg, amps);
}

/// Equal mixture of three flagged Bell-pair terms on three 6-level sites:
/// biseparable across every grouping yet every 2-party marginal is nonlocal.
inline DensityOperator biseparable_example() {
  QuditRegister reg = QuditRegister::uniform(3, 6);
  const auto strides = site_strides(reg.dims());
  auto basis = [&](int a, int b, int c) {
    Vector v = Vector::Zero(reg.total_dimension());
    v(a * strides[0] + b * strides[1] + c * strides[2]) = 1.0;
    return v;
  };
  const double r = 1.0 / std::sqrt(2.0);
  Vector t1 = r * (basis(0, 0, 0) + basis(0, 1, 1));  // |0>_A phi+_01 on BC
  Vector t2 = r * (basis(2, 2, 2) + basis(3, 2, 3));  // |2>_B phi+_23 on AC
  Vector t3 = r * (basis(4, 4, 4) + basis(5, 5, 4));  // |4>_C phi+_45 on AB
  Matrix m = (t1 * t1.adjoint() + t2 * t2.adjoint() + t3 * t3.adjoint()) / 3.0;
  return DensityOperator(reg, std::move(m));
}

// ---------------------------------------------------------------------------
// State-spec grammar and file I/O
// ---------------------------------------------------------------------------

using BuiltState = std::variant<StateVector, DensityOperator>;

enum class StateFamily {
  Ghz,
  W,
  Dicke,
  Translational,
  Linear,
  Ring,
  Grid,
  Psi,
  Psi4,
  Bisep3,
  FcBell,
  File,
};

struct StateSpec {
  StateFamily family;
  std::string text;  // normalized spec text
  std::size_t n = 0;
  std::size_t m = 0;
  int d = 2;
  std::size_t rows = 0, cols = 0;
  bool periodic = false;
  std::optional<double> b;  // psi only; empty means non-paper default
  std::string path;
};

namespace detail {
inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  out.push_back(cur);
  return out;
}

inline long parse_int(const std::string& tok, std::size_t pos) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected integer, got '" + tok + "'", pos);
  }
}

inline double parse_float(const std::string& tok, std::size_t pos) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected float, got '" + tok + "'", pos);
  }
}
}  // namespace detail

inline StateSpec parse_state_spec(const std::string& text) {
  using detail::parse_float;
  using detail::parse_int;
  const auto toks = detail::split(text, ':');
  StateSpec spec;
  spec.text = text;
  std::size_t pos = toks[0].size();  // position of first parameter token
  const std::string& fam = toks[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (toks.size() - 1 < lo || toks.size() - 1 > hi)
      throw ParseError("wrong number of parameters for '" + fam + "'", pos);
  };
  if (fam == "ghz") {
    need(1, 2);
    spec.family = StateFamily::Ghz;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
    spec.d = toks.size() > 2 ? static_cast<int>(parse_int(toks[2], pos)) : 2;
  } else if (fam == "w") {
    need(1, 1);
    spec.family = StateFamily::W;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
  } else if (fam == "dicke") {
    need(2, 2);
    spec.family = StateFamily::Dicke;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
    spec.m = static_cast<std::size_t>(parse_int(toks[2], pos));
  } else if (fam == "ti") {
    need(2, 2);
    spec.family = StateFamily::Translational;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
    spec.m = static_cast<std::size_t>(parse_int(toks[2], pos));
  } else if (fam == "linear") {
    need(1, 1);
    spec.family = StateFamily::Linear;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
  } else if (fam == "ring") {
    need(1, 1);
    spec.family = StateFamily::Ring;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
  } else if (fam == "grid") {
    need(1, 2);
    spec.family = StateFamily::Grid;
    const auto dims = detail::split(toks[1], 'x');
    if (dims.size() != 2) throw ParseError("grid wants RxC", pos);
    spec.rows = static_cast<std::size_t>(parse_int(dims[0], pos));
    spec.cols = static_cast<std::size_t>(parse_int(dims[1], pos));
    if (toks.size() > 2) {
      if (toks[2] != "periodic")
        throw ParseError("unknown grid modifier '" + toks[2] + "'", pos);
      spec.periodic = true;
    }
  } else if (fam == "psi") {
    need(1, 2);
    spec.family = StateFamily::Psi;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
    if (toks.size() > 2) {
      if (toks[2].rfind("b=", 0) != 0)
        throw ParseError("psi parameter must be b=FLOAT", pos);
      spec.b = parse_float(toks[2].substr(2), pos);
    }
  } else if (fam == "psi4") {
    need(0, 0);
    spec.family = StateFamily::Psi4;
  } else if (fam == "bisep3") {
    need(0, 0);
    spec.family = StateFamily::Bisep3;
  } else if (fam == "fcbell") {
    need(1, 1);
    spec.family = StateFamily::FcBell;
    spec.n = static_cast<std::size_t>(parse_int(toks[1], pos));
  } else if (fam == "file") {
    need(1, 64);  // paths may contain ':'
    spec.family = StateFamily::File;
    spec.path = text.substr(fam.size() + 1);
  } else {
    throw ParseError("unknown state family '" + fam + "'", 0);
  }
  return spec;
}

inline BuiltState load_state_json(const std::string& path);

/// Default b for "psi:N" when omitted: the small-b regime b = 0.1/sqrt(D).
/// This default is not taken from any published optimum.
inline double psi_default_b(std::size_t n) {
  const double terms_d = static_cast<double>(n) * (n - 1) / 2.0;
  return 0.1 / std::sqrt(terms_d);
}

inline BuiltState build_state(const StateSpec& spec) {
  switch (spec.family) {
    case StateFamily::Ghz:
      return ghz_state(spec.n, spec.d);
    case StateFamily::W:
      return w_state(spec.n);
    case StateFamily::Dicke:
      return dicke_state(spec.n, spec.m);
    case StateFamily::Translational:
      return translational_state(spec.n, spec.m);
    case StateFamily::Linear:
      return linear_cluster(spec.n);
    case StateFamily::Ring:
      return ring_cluster(spec.n);
    case StateFamily::Grid:
      return grid_cluster(spec.rows, spec.cols, spec.periodic);
    case StateFamily::Psi:
      return psi_max_persistency(spec.n,
                                 spec.b ? *spec.b : psi_default_b(spec.n));
    case StateFamily::Psi4:
      return psi4_appendix();
    case StateFamily::Bisep3:
      return biseparable_example();
    case StateFamily::FcBell:
      return fully_connected_bell(spec.n);
    case StateFamily::File:
      return load_state_json(spec.path);
  }
  throw Error("unreachable");
}

inline BuiltState build_state(const std::string& text) {
  return build_state(parse_state_spec(text));
}

// JSON file format: {"dims":[...], "amplitudes":[[re,im],...]} for pure
// states, {"dims":[...], "matrix":[[[re,im],...],...]} for mixed.

inline nlohmann::json state_to_json(const StateVector& psi) {
  nlohmann::json j;
  j["dims"] = psi.reg().dims();
  auto& amps = j["amplitudes"] = nlohmann::json::array();
  for (long i = 0; i < psi.dim(); ++i)
    amps.push_back({psi.amplitudes()(i).real(), psi.amplitudes()(i).imag()});
  return j;
}

inline nlohmann::json state_to_json(const DensityOperator& rho) {
  nlohmann::json j;
  j["dims"] = rho.reg().dims();
  auto& rows = j["matrix"] = nlohmann::json::array();
  for (long i = 0; i < rho.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (long k = 0; k < rho.dim(); ++k)
      row.push_back({rho.matrix()(i, k).real(), rho.matrix()(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json state_to_json(const BuiltState& s) {
  if (std::holds_alternative<StateVector>(s))
    return state_to_json(std::get<StateVector>(s));
  return state_to_json(std::get<DensityOperator>(s));
}

inline BuiltState state_from_json(const nlohmann::json& j) {
  QuditRegister reg(j.at("dims").get<std::vector<int>>());
  if (j.contains("amplitudes")) {
    const auto& amps = j.at("amplitudes");
    Vector v(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i)
      v(static_cast<long>(i)) =
          Complex(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    return StateVector(reg, v);
  }
  if (j.contains("matrix")) {
    const auto& rows = j.at("matrix");
    Matrix m(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        m(static_cast<long>(i), static_cast<long>(k)) =
            Complex(rows[i][k].at(0).get<double>(),
                    rows[i][k].at(1).get<double>());
    return DensityOperator(reg, std::move(m));
  }
  throw IoError("state JSON needs 'amplitudes' or 'matrix'");
}

inline BuiltState load_state_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    return state_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad state file '" + path + "': " + e.what());
  }
}

}  // namespace persist

#endif
