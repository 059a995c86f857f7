#include "dualgeo/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace dualgeo {

namespace {

using nlohmann::json;

// Built-in systems in config form.
const std::map<std::string, const char*>& registry() {
  static const std::map<std::string, const char*> r = {
      {"ho2", R"json({
  "name": "ho2",
  "description": "isotropic harmonic oscillator on the Euclidean plane",
  "dimension": 2,
  "metric": [["1", "0"], ["0", "1"]],
  "kind": "nondegenerate",
  "potentials": ["x1^2 + x2^2", "x1", "x2", "1"],
  "domain": [[-2, 2], [-2, 2]],
  "singular_margin": 0.001,
  "killing": [
    {"name": "g", "tensor": [["1", "0"], ["0", "1"]], "w": "x1^2 + x2^2 + x1 + x2 + 1"},
    {"name": "dx1dx1", "tensor": [["1", "0"], ["0", "0"]], "w": "x1^2 + x1"},
    {"name": "dx1dx2", "tensor": [["0", "1/2"], ["1/2", "0"]], "w": "x1*x2 + (x1 + x2)/2"},
    {"name": "dx2dx2", "tensor": [["0", "0"], ["0", "1"]], "w": "x2^2 + x2"}
  ],
  "expected": [
    {"point": [0.5, 0.5], "tensor": "T_hat", "component": [0, 0, 0], "value": 0, "tol": 1e-12},
    {"point": [1.5, -1], "tensor": "t", "component": [1], "value": 0, "tol": 1e-12}
  ]
})json"},
      {"sw2", R"json({
  "name": "sw2",
  "description": "Smorodinsky-Winternitz system on the Euclidean plane",
  "dimension": 2,
  "metric": [["1", "0"], ["0", "1"]],
  "kind": "nondegenerate",
  "potentials": ["x1^2 + x2^2", "1/x1^2", "1/x2^2", "1"],
  "domain": [[0.5, 3], [0.5, 3]],
  "singular": [{"axis": 1, "value": 0}, {"axis": 2, "value": 0}],
  "singular_margin": 0.001,
  "killing": [
    {"name": "g", "tensor": [["1", "0"], ["0", "1"]], "w": "x1^2 + x2^2 + 1/x1^2 + 1/x2^2 + 1"},
    {"name": "dx1dx1", "tensor": [["1", "0"], ["0", "0"]], "w": "x1^2 + 1/x1^2"},
    {"name": "L2", "tensor": [["x2^2", "-x1*x2"], ["-x1*x2", "x1^2"]], "w": "x2^2/x1^2 + x1^2/x2^2"}
  ],
  "expected": [
    {"point": [1, 2], "tensor": "T_hat", "component": [0, 0, 0], "value": -1.5, "tol": 1e-12},
    {"point": [1, 2], "tensor": "T_hat", "component": [0, 1, 1], "value": 1.5, "tol": 1e-12},
    {"point": [1, 2], "tensor": "T_hat", "component": [1, 0, 0], "value": 0.75, "tol": 1e-12},
    {"point": [1, 2], "tensor": "T_hat", "component": [1, 1, 1], "value": -0.75, "tol": 1e-12},
    {"point": [1, 2], "tensor": "T_hat", "component": [0, 0, 1], "value": 0, "tol": 1e-12},
    {"point": [1, 2], "tensor": "t", "component": [0], "value": -0.75, "tol": 1e-12},
    {"point": [1, 2], "tensor": "t", "component": [1], "value": -0.375, "tol": 1e-12},
    {"point": [1, 2], "tensor": "B_hat", "component": [0, 0, 0], "value": -3, "tol": 1e-12}
  ]
})json"},
      {"sw2-weak", R"json({
  "name": "sw2-weak",
  "description": "Smorodinsky-Winternitz system restricted to its inverse-square potentials",
  "dimension": 2,
  "metric": [["1", "0"], ["0", "1"]],
  "kind": "semidegenerate",
  "potentials": ["1/x1^2", "1/x2^2", "1"],
  "domain": [[0.5, 3], [0.5, 3]],
  "singular": [{"axis": 1, "value": 0}, {"axis": 2, "value": 0}],
  "singular_margin": 0.001,
  "killing": [
    {"name": "g", "tensor": [["1", "0"], ["0", "1"]], "w": "1/x1^2 + 1/x2^2 + 1"},
    {"name": "dx1dx1", "tensor": [["1", "0"], ["0", "0"]], "w": "1/x1^2"},
    {"name": "L2", "tensor": [["x2^2", "-x1*x2"], ["-x1*x2", "x1^2"]], "w": "x2^2/x1^2 + x1^2/x2^2"}
  ],
  "expected_classification": "WEAK",
  "expected": [
    {"point": [1, 2], "tensor": "s_hat", "component": [0], "value": -3, "tol": 1e-12},
    {"point": [1, 2], "tensor": "s_hat", "component": [1], "value": -1.5, "tol": 1e-12},
    {"point": [1, 2], "tensor": "D_hat", "component": [0, 0, 0], "value": -3, "tol": 1e-12},
    {"point": [1, 2], "tensor": "beta", "component": [0], "value": 0, "tol": 1e-12}
  ]
})json"},
      {"sw2-strong-synthetic", R"json({
  "name": "sw2-strong-synthetic",
  "description": "tensor-level semi-degenerate input: the restricted Smorodinsky-Winternitz D with an extra D^1_22 = 1",
  "dimension": 2,
  "metric": [["1", "0"], ["0", "1"]],
  "kind": "semidegenerate",
  "potentials": [],
  "difference_tensor": [
    [["-3/x1", "0"], ["0", "1"]],
    [["0", "0"], ["0", "-3/x2"]]
  ],
  "domain": [[0.5, 3], [0.5, 3]],
  "singular": [{"axis": 1, "value": 0}, {"axis": 2, "value": 0}],
  "singular_margin": 0.001,
  "killing": [
    {"name": "g", "tensor": [["1", "0"], ["0", "1"]]}
  ],
  "expected_classification": "STRONG",
  "expected": [
    {"point": [1, 2], "tensor": "s_hat", "component": [0], "value": -2, "tol": 1e-12}
  ]
})json"},
      {"sphere3-trivial", R"json({
  "name": "sphere3-trivial",
  "description": "round unit 3-sphere in a stereographic chart with vanishing structure tensor",
  "dimension": 3,
  "metric": [["4/(1 + x1^2 + x2^2 + x3^2)^2", "0", "0"],
             ["0", "4/(1 + x1^2 + x2^2 + x3^2)^2", "0"],
             ["0", "0", "4/(1 + x1^2 + x2^2 + x3^2)^2"]],
  "kind": "nondegenerate",
  "potentials": ["(1 - x1^2 - x2^2 - x3^2)/(1 + x1^2 + x2^2 + x3^2)",
                 "2*x1/(1 + x1^2 + x2^2 + x3^2)",
                 "2*x2/(1 + x1^2 + x2^2 + x3^2)",
                 "2*x3/(1 + x1^2 + x2^2 + x3^2)",
                 "1"],
  "domain": [[-1, 1], [-1, 1], [-1, 1]],
  "singular_margin": 0.001,
  "zeta": "0",
  "killing": [
    {"name": "g", "tensor": [["4/(1 + x1^2 + x2^2 + x3^2)^2", "0", "0"],
                             ["0", "4/(1 + x1^2 + x2^2 + x3^2)^2", "0"],
                             ["0", "0", "4/(1 + x1^2 + x2^2 + x3^2)^2"]]}
  ],
  "expected": [
    {"point": [0.2, -0.3, 0.5], "tensor": "T_hat", "component": [0, 1, 2], "value": 0, "tol": 1e-12}
  ]
})json"},
  };
  return r;
}

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) config_fail(key, "missing required field");
  return doc.at(key);
}

Expression parse_field(const json& v, const std::string& where, const ParseContext& ctx) {
  if (!v.is_string()) config_fail(where, "expected an expression string");
  try {
    return parse(v.get<std::string>(), ctx);
  } catch (const ParseError& e) {
    config_fail(where, std::string(e.what()) + " (offset " + std::to_string(e.offset()) + ")");
  }
}

std::vector<std::vector<Expression>> parse_matrix(const json& v, const std::string& where, const ParseContext& ctx) {
  const int n = ctx.dimension;
  if (!v.is_array() || static_cast<int>(v.size()) != n) config_fail(where, "expected an n x n array");
  std::vector<std::vector<Expression>> m;
  for (int i = 0; i < n; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) config_fail(where, "expected an n x n array");
    m.emplace_back();
    for (int j = 0; j < n; ++j)
      m.back().push_back(parse_field(row[static_cast<std::size_t>(j)],
                                     where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", ctx));
  }
  return m;
}

Point parse_point(const json& v, int n, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) config_fail(where, "expected a point with n coordinates");
  Point p(n);
  for (int i = 0; i < n; ++i) p[i] = v[static_cast<std::size_t>(i)].get<double>();
  return p;
}

Classification parse_classification(const std::string& s, const std::string& where) {
  if (s == "WEAK") return Classification::Weak;
  if (s == "STRONG") return Classification::Strong;
  config_fail(where, "expected WEAK or STRONG");
}

}  // namespace

ValidationError::ValidationError(const std::string& fixture, std::vector<ValidationFailure> failures)
    : Error("fixture '" + fixture + "' failed " + std::to_string(failures.size()) + " validation check(s)"),
      failures_(std::move(failures)) {}

StructureModel Fixture::model() const {
  if (!d_hat.empty()) return StructureModel::prescribed_d(metric, d_hat);
  if (kind == FamilyKind::Nondegenerate) return StructureModel::nondegenerate(metric, potentials);
  return StructureModel::semidegenerate(metric, potentials);
}

GridSpec Fixture::grid(int per_axis) const { return GridSpec{chart.lo, chart.hi, per_axis}; }

std::vector<Point> Fixture::sample_points(int per_axis) const {
  std::vector<Point> out;
  for (const Point& p : grid_points(grid(per_axis)))
    if (chart.contains(p)) out.push_back(p);
  return out;
}

Expression Fixture::total_potential() const {
  if (potentials.empty()) return Expression::constant(0.0, dim());
  NodePtr acc = std::make_shared<const Node>(potentials.front().root());
  for (std::size_t i = 1; i < potentials.size(); ++i) {
    auto sum = std::make_shared<Node>();
    sum->kind = Node::Kind::Add;
    sum->lhs = acc;
    sum->rhs = std::make_shared<const Node>(potentials[i].root());
    acc = sum;
  }
  return Expression(acc, dim());
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

bool is_builtin(const std::string& name) { return registry().count(name) > 0; }

Fixture builtin(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error("unknown built-in fixture '" + name + "'");
  return fixture_from_json(json::parse(it->second));
}

Fixture fixture_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("fixture config must be a JSON object");
  Fixture f;
  f.source = doc;
  try {
    f.name = doc.value("name", std::string("unnamed"));
    f.description = doc.value("description", std::string());
    const int n = require(doc, "dimension").get<int>();
    if (n < 2 || n > kMaxDim) config_fail("dimension", "must be between 2 and " + std::to_string(kMaxDim));
    ParseContext ctx;
    ctx.dimension = n;
    if (doc.contains("constants"))
      for (const auto& [k, v] : doc.at("constants").items()) ctx.constants[k] = v.get<double>();

    try {
      f.metric = Metric(parse_matrix(require(doc, "metric"), "metric", ctx));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      config_fail("metric", e.what());
    }

    const std::string kind = require(doc, "kind").get<std::string>();
    if (kind == "nondegenerate") {
      f.kind = FamilyKind::Nondegenerate;
    } else if (kind == "semidegenerate") {
      f.kind = FamilyKind::Semidegenerate;
    } else {
      config_fail("kind", "expected \"nondegenerate\" or \"semidegenerate\"");
    }

    const json& pots = require(doc, "potentials");
    if (!pots.is_array()) config_fail("potentials", "expected an array of expression strings");
    for (std::size_t a = 0; a < pots.size(); ++a)
      f.potentials.push_back(parse_field(pots[a], "potentials[" + std::to_string(a) + "]", ctx));

    if (doc.contains("difference_tensor")) {
      const json& d = doc.at("difference_tensor");
      if (!d.is_array() || static_cast<int>(d.size()) != n) config_fail("difference_tensor", "expected n arrays of n x n");
      for (int k = 0; k < n; ++k)
        f.d_hat.push_back(parse_matrix(d[static_cast<std::size_t>(k)], "difference_tensor[" + std::to_string(k) + "]", ctx));
      if (f.kind != FamilyKind::Semidegenerate) config_fail("difference_tensor", "only allowed for semidegenerate fixtures");
    } else {
      const std::size_t want = f.kind == FamilyKind::Nondegenerate ? n + 2 : n + 1;
      if (f.potentials.size() != want)
        config_fail("potentials", "a " + kind + " family in dimension " + std::to_string(n) + " has " +
                                      std::to_string(want) + " basis potentials");
    }

    const json& dom = require(doc, "domain");
    if (!dom.is_array() || static_cast<int>(dom.size()) != n) config_fail("domain", "expected n [lo, hi] pairs");
    f.chart.dim = n;
    f.chart.lo = Vec(n);
    f.chart.hi = Vec(n);
    for (int i = 0; i < n; ++i) {
      const json& iv = dom[static_cast<std::size_t>(i)];
      f.chart.lo[i] = iv.at(0).get<double>();
      f.chart.hi[i] = iv.at(1).get<double>();
      if (!(f.chart.lo[i] < f.chart.hi[i])) config_fail("domain", "empty interval on axis " + std::to_string(i + 1));
    }
    f.chart.singular_margin = doc.value("singular_margin", 1e-3);
    if (doc.contains("singular"))
      for (const auto& s : doc.at("singular")) {
        const int axis = s.at("axis").get<int>();
        if (axis < 1 || axis > n) config_fail("singular", "axis out of range");
        f.chart.singular.push_back({axis - 1, s.at("value").get<double>()});
      }

    if (doc.contains("killing"))
      for (std::size_t a = 0; a < doc.at("killing").size(); ++a) {
        const json& k = doc.at("killing")[a];
        const std::string where = "killing[" + std::to_string(a) + "]";
        KillingEntry e;
        e.name = k.value("name", "K" + std::to_string(a));
        e.k = parse_matrix(k.at("tensor"), where + ".tensor", ctx);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < i; ++j)
            if (!(e.k[i][j] == e.k[j][i])) config_fail(where, "Killing tensor is not symmetric");
        if (k.contains("w")) e.w = parse_field(k.at("w"), where + ".w", ctx);
        f.killing.push_back(std::move(e));
      }

    if (doc.contains("zeta")) f.zeta = parse_field(doc.at("zeta"), "zeta", ctx);
    if (doc.contains("expected_classification"))
      f.expected_classification =
          parse_classification(doc.at("expected_classification").get<std::string>(), "expected_classification");
    if (doc.contains("expected"))
      for (std::size_t a = 0; a < doc.at("expected").size(); ++a) {
        const json& e = doc.at("expected")[a];
        const std::string where = "expected[" + std::to_string(a) + "]";
        SpotCheck s;
        s.point = parse_point(e.at("point"), n, where + ".point");
        s.tensor = e.at("tensor").get<std::string>();
        s.component = e.at("component").get<std::vector<int>>();
        s.value = e.at("value").get<double>();
        s.tol = e.value("tol", 1e-9);
        f.expected.push_back(std::move(s));
      }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed fixture config: ") + e.what());
  }
  return f;
}

Fixture load_fixture(const std::string& path, const ValidationOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  Fixture f = fixture_from_json(doc);
  auto failures = validate(f, opts);
  if (!failures.empty()) throw ValidationError(f.name, std::move(failures));
  return f;
}

Fixture resolve_fixture(const std::string& source, const ValidationOptions& opts) {
  if (is_builtin(source)) return builtin(source);
  std::ifstream probe(source);
  if (!probe) throw Error("unknown fixture '" + source + "' (not a built-in name and no such file)");
  return load_fixture(source, opts);
}

double structure_component(const PointStructure& s, const std::string& tensor, const std::vector<int>& idx) {
  auto vec = [&](const Vec& v) {
    if (idx.size() != 1 || idx[0] < 0 || idx[0] >= v.size()) throw Error("bad component index for " + tensor);
    return v[idx[0]];
  };
  auto ten = [&](const TensorValue& t) {
    if (static_cast<int>(idx.size()) != t.rank()) throw Error("bad component index for " + tensor);
    for (int i : idx)
      if (i < 0 || i >= t.dim()) throw Error("bad component index for " + tensor);
    std::size_t off = 0;
    for (int i : idx) off = off * static_cast<std::size_t>(t.dim()) + static_cast<std::size_t>(i);
    return t.data()[off];
  };
  if (tensor == "T_hat" && s.has_t_hat) return ten(s.t_hat);
  if (tensor == "t" && s.has_t_hat) return vec(s.dec.t);
  if (tensor == "tau" && s.has_t_hat) return vec(s.dec.tau);
  if (tensor == "S" && s.has_t_hat) return ten(s.dec.s);
  if (tensor == "B_hat" && s.has_t_hat) return ten(s.b.hat);
  if (tensor == "D_hat" && s.has_d_hat) return ten(s.d_hat);
  if (tensor == "s_hat" && s.has_d_hat) return vec(s.s_up);
  if (tensor == "d" && s.has_d_hat) return vec(s.dd);
  if (tensor == "beta" && s.has_d_hat) return vec(s.beta);
  if (tensor == "N" && s.has_d_hat) return ten(s.n);
  throw Error("tensor '" + tensor + "' is not available for this fixture");
}

std::vector<ValidationFailure> validate(const Fixture& f, const ValidationOptions& opts) {
  std::vector<ValidationFailure> out;
  const std::vector<Point> pts = f.sample_points(opts.per_axis);
  const StructureModel model = f.model();
  const Expression total = f.total_potential();
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto guard = [&](const std::string& check, const Point& p, auto&& body) {
    try {
      body();
    } catch (const RecoveryError& e) {
      out.push_back({check, p, e.residual(), e.what()});
    } catch (const std::exception& e) {
      out.push_back({check, p, std::numeric_limits<double>::quiet_NaN(), e.what()});
    }
  };

  if (pts.empty()) out.push_back({"domain", Point(), 0.0, "no sample point lies inside the chart"});

  std::vector<PointStructure> structures(pts.size());
  std::vector<bool> have(pts.size(), false);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    guard("metric", p, [&] { (void)f.metric.at(p); });
    guard("recovery", p, [&] {
      structures[i] = model.at(p);
      have[i] = true;
    });
    for (const auto& k : f.killing) {
      guard("killing:" + k.name, p, [&] {
        const double r = killing_residual(f.metric, k, p);
        if (!(r < opts.killing_tol)) out.push_back({"killing:" + k.name, p, r, "Killing equation residual"});
      });
      for (std::size_t a = 0; a < f.potentials.size(); ++a)
        guard("bertrand-darboux:" + k.name, p, [&] {
          const double r = bertrand_darboux_residual(f.metric, k, f.potentials[a], p);
          if (!(r < opts.bertrand_darboux_tol))
            out.push_back({"bertrand-darboux:" + k.name, p, r, "d(K(dV)) for potentials[" + std::to_string(a) + "]"});
        });
      if (k.w) {
        std::vector<Vec> momenta;
        for (int m = 0; m < opts.momenta_per_point; ++m) {
          Vec v(f.dim());
          for (int i = 0; i < f.dim(); ++i) v[i] = normal(rng);
          momenta.push_back(v);
        }
        guard("poisson:" + k.name, p, [&] {
          const double r = poisson_residual(f.metric, total, k, p, momenta);
          if (!(r < opts.poisson_tol)) out.push_back({"poisson:" + k.name, p, r, "{H, F} with random momenta"});
        });
      }
    }
  }

  for (const auto& s : f.expected) {
    guard("expected:" + s.tensor, s.point, [&] {
      const double v = structure_component(model.at(s.point), s.tensor, s.component);
      if (!(std::abs(v - s.value) <= s.tol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "expected " << s.value << ", got " << v;
        out.push_back({"expected:" + s.tensor, s.point, std::abs(v - s.value), msg.str()});
      }
    });
  }

  if (f.expected_classification) {
    guard("classification", Point(), [&] {
      const ClassifyResult c = classify(model, pts);
      if (c.verdict != *f.expected_classification)
        out.push_back({"classification", Point(), c.max_n, "expected " + to_string(*f.expected_classification) +
                                                               ", got " + to_string(c.verdict)});
    });
  }
  return out;
}

nlohmann::json validation_json(const std::vector<ValidationFailure>& failures) {
  json arr = json::array();
  for (const auto& f : failures) {
    json p = json::array();
    for (Eigen::Index i = 0; i < f.point.size(); ++i) p.push_back(f.point[i]);
    json r = std::isfinite(f.residual) ? json(f.residual) : json(nullptr);
    arr.push_back({{"check", f.check}, {"point", p}, {"residual", r}, {"detail", f.detail}});
  }
  return arr;
}

}  // namespace dualgeo
