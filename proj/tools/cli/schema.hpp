#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli/json_out.hpp"
#include "fenchelkit/fenchelkit.hpp"

namespace fenchelkit::cli {

/// Malformed input. Always names the offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what) : std::runtime_error("field '" + path + "': " + what) {}

  static SchemaError at_line(std::size_t line, const std::string& what) {
    return SchemaError(Raw{}, "line " + std::to_string(line) + ": " + what);
  }

 private:
  struct Raw {};
  SchemaError(Raw, const std::string& what) : std::runtime_error(what) {}
};

/// A JSON value together with its dotted path, for diagnostics.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& what) const { throw SchemaError(path_, what); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
  Node operator[](const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    auto it = j_->find(key);
    if (it == j_->end()) throw SchemaError(child(key), "missing");
    return {*it, child(key)};
  }
  std::optional<Node> get(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return (*this)[key];
  }
  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }
  Node at(std::size_t k) const {
    if (!j_->is_array() || k >= j_->size()) fail("expected an array");
    return {(*j_)[k], path_ + "[" + std::to_string(k) + "]"};
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  /// A finite number, or the tokens "inf" / "-inf" when allowed.
  double number(bool allow_inf = false) const {
    if (j_->is_number()) return j_->get<double>();
    if (allow_inf && j_->is_string()) {
      const auto s = j_->get<std::string>();
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
    }
    fail(allow_inf ? "expected a number or \"inf\"" : "expected a number");
  }
  int integer(int lo, int hi) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const auto v = j_->get<long long>();
    if (v < lo || v > hi) fail("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }
  /// A vector; a bare number is read as a vector of length one.
  Vec vec(bool allow_inf = false) const {
    if (j_->is_number()) return Vec::Constant(1, number());
    Vec v(static_cast<Eigen::Index>(size()));
    for (std::size_t k = 0; k < size(); ++k) v[static_cast<Eigen::Index>(k)] = at(k).number(allow_inf);
    return v;
  }
  /// A matrix as a list of rows; a bare number is 1×1 and a flat list of
  /// numbers is a column.
  Mat mat() const {
    if (j_->is_number()) return Mat::Constant(1, 1, number());
    const std::size_t rows = size();
    if (rows == 0) return Mat(0, 0);
    if (!at(0).json().is_array()) {
      const Vec v = vec();
      return Mat(v);
    }
    const std::size_t cols = at(0).size();
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const Node r = at(i);
      if (r.size() != cols) r.fail("ragged matrix row");
      for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.at(j).number();
    }
    return m;
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* j_;
  std::string path_;
};

/// Runs a library constructor and reports its validation errors as schema
/// errors at `n`.
template <class F>
auto validated(const Node& n, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

inline Grid1D read_grid(const Node& n) {
  const double lo = n["lo"].number(), hi = n["hi"].number();
  const int count = n["n"].integer(2, 1000000);
  return validated(n, [&] { return Grid1D(lo, hi, count); });
}

inline NormKind read_norm(const Node& n) {
  const auto s = n.str();
  if (s == "l1") return NormKind::l1;
  if (s == "l2") return NormKind::l2;
  if (s == "linf") return NormKind::linf;
  n.fail("expected one of l1, l2, linf");
}

/// Function descriptors, tagged by "type".
inline FunctionDescriptor read_function(const Node& n) {
  const std::string type = n["type"].str();
  return validated(n, [&]() -> FunctionDescriptor {
    if (type == "quadratic") {
      const Mat A = n["A"].mat();
      const Vec b = n.has("b") ? n["b"].vec() : Vec(Vec::Zero(A.rows()));
      return make_quadratic(A, b, n.has("c") ? n["c"].number() : 0.0);
    }
    if (type == "norm_power") return make_norm_power(n["p"].number(), n.has("weight") ? n["weight"].number() : 1.0);
    if (type == "abs") return make_abs();
    if (type == "entropy") return make_entropy();
    if (type == "minimal_surface") return make_minimal_surface();
    if (type == "interval") return make_interval(n["lo"].vec(true), n["hi"].vec(true));
    if (type == "ball") return make_ball(n["radius"].number(), n.has("norm") ? read_norm(n["norm"]) : NormKind::l2);
    if (type == "norm") return make_norm(read_norm(n["norm"]), n.has("scale") ? n["scale"].number() : 1.0);
    if (type == "sampled") {
      const Grid1D g = read_grid(n["grid"]);
      const Vec v = n["values"].vec(true);
      std::vector<ExtReal> vals;
      for (double x : v) {
        if (x == -kInf) n["values"].fail("-inf is not allowed");
        vals.emplace_back(x);
      }
      if (n.has("grid_y")) return make_sampled(GridFunction(g, read_grid(n["grid_y"]), std::move(vals)));
      return make_sampled(GridFunction(g, std::move(vals)));
    }
    if (type == "tilt") {
      const Vec slope = n["slope"].vec();
      return make_tilt(read_function(n["inner"]), slope, n.has("offset") ? n["offset"].number() : 0.0,
                       n.has("shift") ? n["shift"].vec() : Vec());
    }
    if (type == "conjugate_of") return make_conjugate_of(read_function(n["inner"]));
    if (type == "infinity") return make_infinity();
    n["type"].fail("unknown function type '" + type + "'");
  });
}

/// Point sets: a flat list is a set of 1D points, a list of rows is one
/// point per row.
inline Mat read_points(const Node& n) {
  Mat m = n.mat();
  if (m.size() == 0) n.fail("empty point set");
  return m;
}

/// Grid domains. `mask` lists rows j = 0, 1, …; '.' is Ω, 'S' is Σ, '#' is
/// outside Ω.
inline GridDomain read_domain(const Node& n) {
  const int nx = n["nx"].integer(2, 4096);
  const int ny = n.has("ny") ? n["ny"].integer(1, 4096) : 1;
  const double h = n["h"].number();
  if (!(h > 0.0)) n["h"].fail("must be positive");
  GridDomain d(nx, ny, h, n.has("x0") ? n["x0"].number() : 0.0, n.has("y0") ? n["y0"].number() : 0.0);
  if (auto mask = n.get("mask")) {
    if (static_cast<int>(mask->size()) != ny) mask->fail("expected " + std::to_string(ny) + " rows");
    for (int j = 0; j < ny; ++j) {
      const Node row = mask->at(static_cast<std::size_t>(j));
      const std::string s = row.str();
      if (static_cast<int>(s.size()) != nx) row.fail("expected " + std::to_string(nx) + " characters");
      for (int i = 0; i < nx; ++i) {
        const int k = d.index(i, j);
        switch (s[static_cast<std::size_t>(i)]) {
          case '.': break;
          case 'S': d.sigma[k] = 1; break;
          case '#': d.omega[k] = 0; break;
          default: row.fail("unknown mask character");
        }
      }
    }
  }
  if (auto f = n.get("f")) {
    const Vec v = f->vec();
    if (v.size() != d.nodes()) f->fail("expected one value per node");
    for (int k = 0; k < d.nodes(); ++k) d.f[k] = v[k];
  }
  if (auto atoms = n.get("atoms")) {
    // A point mass m at a node becomes the density m / h^dim there.
    for (std::size_t a = 0; a < atoms->size(); ++a) {
      const Node atom = atoms->at(a);
      const Vec p = atom["at"].vec();
      const int k = d.locate(p[0], p.size() > 1 ? p[1] : d.y0);
      if (k < 0 || !d.in_omega(k)) atom["at"].fail("not a node of the domain");
      d.f[k] += atom["mass"].number() / d.cell_measure();
    }
  }
  validated(n, [&] {
    d.validate();
    return 0;
  });
  return d;
}

}  // namespace fenchelkit::cli
