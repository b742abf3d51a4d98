#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "monolab/br_solver.hpp"
#include "monolab/classifiers.hpp"
#include "monolab/fitzpatrick.hpp"
#include "monolab/harness.hpp"

namespace monolab {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// A JSON value together with its path in the document.
class In {
 public:
  In(const ojson& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const ojson& json() const { return *j_; }
  const std::string& path() const { return path_; }
  [[noreturn]] void fail(const std::string& msg) const { throw ScenarioError(path_, msg); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  In at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) throw ScenarioError(child(key), "missing required key");
    return In(*it, child(key));
  }

  std::optional<In> opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::vector<In> items() const {
    if (!j_->is_array()) fail("expected an array");
    std::vector<In> out;
    for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "[" + std::to_string(i) + "]");
    return out;
  }

  // Objects only; rejects keys outside `allowed`, naming the first offender.
  void keys(std::initializer_list<std::string_view> allowed) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, v] : j_->items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) throw ScenarioError(child(k), "unknown key");
    }
  }

  // A single-key object {"tag": body}.
  std::pair<std::string, In> tagged() const {
    if (!j_->is_object() || j_->size() != 1) fail("expected a single-key descriptor");
    const auto it = j_->begin();
    return {it.key(), In(it.value(), child(it.key()))};
  }

  double num() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }

  double positive() const {
    const double v = num();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  int integer(int lo = std::numeric_limits<int>::min()) const {
    if (!j_->is_number_integer()) fail("expected an integer");
    const auto v = j_->get<std::int64_t>();
    if (v < lo || v > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(v);
  }

  std::uint64_t seed() const {
    if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0)) {
      fail("seed must be a nonnegative integer");
    }
    return j_->get<std::uint64_t>();
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  NormTag norm_tag() const {
    try {
      return parse_norm_tag(str());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  // Length-n vector; a bare number is accepted in one dimension.
  Vec vec(int n) const {
    if (n == 1 && j_->is_number()) return Vec::Constant(1, num());
    const auto xs = items();
    if (static_cast<int>(xs.size()) != n) fail("expected " + std::to_string(n) + " entries");
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = xs[i].num();
    return v;
  }

  Mat mat(int n) const {
    if (n == 1 && j_->is_number()) return Mat::Constant(1, 1, num());
    const auto rows = items();
    if (static_cast<int>(rows.size()) != n) fail("expected " + std::to_string(n) + " rows");
    Mat M(n, n);
    for (int i = 0; i < n; ++i) M.row(i) = rows[i].vec(n).transpose();
    return M;
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const ojson* j_;
  std::string path_;
};

// Rethrows library validation errors as scenario errors at `where`.
template <class F>
auto guarded(const In& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    where.fail(e.what());
  }
}

class Builder {
 public:
  explicit Builder(DualPair pair) : pair_(pair) {}

  const DualPair& pair() const { return pair_; }
  int dim() const { return pair_.dim(); }

  CompactConvexSet set(const In& in, Side side = Side::primal) const {
    const auto [tag, body] = in.tagged();
    const int n = dim();
    return guarded(in, [&]() -> CompactConvexSet {
      if (tag == "polytope") {
        std::vector<Vec> vs;
        for (const auto& p : body.items()) vs.push_back(p.vec(n));
        return CompactConvexSet::polytope(std::move(vs), side);
      }
      if (tag == "ball") {
        body.keys({"center", "radius", "norm"});
        const NormTag norm = body.has("norm") ? body.at("norm").norm_tag() : NormTag::L2;
        return CompactConvexSet::ball(body.at("center").vec(n), body.at("radius").num(), norm, side);
      }
      if (tag == "capsule") {
        body.keys({"a", "b", "radius", "norm"});
        const NormTag norm = body.has("norm") ? body.at("norm").norm_tag() : NormTag::L2;
        return CompactConvexSet::capsule(body.at("a").vec(n), body.at("b").vec(n), body.at("radius").num(), norm,
                                         side);
      }
      if (tag == "interval") {
        if (n != 1) in.fail("interval needs a one-dimensional space");
        const Vec lh = body.vec(2);
        return CompactConvexSet::interval(lh[0], lh[1], side);
      }
      if (tag == "box") {
        body.keys({"lo", "hi"});
        return CompactConvexSet::box(body.at("lo").vec(n), body.at("hi").vec(n), side);
      }
      if (tag == "singleton") return CompactConvexSet::singleton(body.vec(n), side);
      throw ScenarioError(body.path(), "unknown set kind");
    });
  }

  ConvexFn function(const In& in) const {
    const auto [tag, body] = in.tagged();
    const int n = dim();
    return guarded(in, [&]() -> ConvexFn {
      if (tag == "quadratic") {
        body.keys({"Q", "b", "c"});
        const Vec b = body.has("b") ? body.at("b").vec(n) : Vec::Zero(n);
        const double c = body.has("c") ? body.at("c").num() : 0.0;
        return ConvexFn::quadratic(body.at("Q").mat(n), b, c);
      }
      if (tag == "norm") {
        if (body.json().is_number()) return ConvexFn::norm(n, body.num(), pair_.primal_norm());
        body.keys({"scale", "norm"});
        const double scale = body.has("scale") ? body.at("scale").num() : 1.0;
        const NormTag norm = body.has("norm") ? body.at("norm").norm_tag() : pair_.primal_norm();
        return ConvexFn::norm(n, scale, norm);
      }
      if (tag == "support") return ConvexFn::support(set(body, Side::dual));
      if (tag == "indicator") return ConvexFn::indicator(set(body));
      if (tag == "affine") {
        body.keys({"a", "c"});
        return ConvexFn::affine(body.at("a").vec(n), body.has("c") ? body.at("c").num() : 0.0);
      }
      if (tag == "half_sq_norm") {
        body.keys({"norm"});
        return ConvexFn::half_sq_norm(n, body.has("norm") ? body.at("norm").norm_tag() : pair_.primal_norm());
      }
      if (tag == "zero") {
        body.keys({});
        return ConvexFn::zero(n);
      }
      if (tag == "translate") {
        body.keys({"f", "shift", "tilt"});
        const Vec shift = body.has("shift") ? body.at("shift").vec(n) : Vec::Zero(n);
        const Vec tilt = body.has("tilt") ? body.at("tilt").vec(n) : Vec::Zero(n);
        return ConvexFn::translate(function(body.at("f")), shift, tilt);
      }
      if (tag == "sum") {
        const auto terms = body.items();
        if (terms.size() < 2) body.fail("a sum needs at least two terms");
        ConvexFn f = function(terms[0]);
        for (std::size_t i = 1; i < terms.size(); ++i) f = ConvexFn::sum(f, function(terms[i]));
        return f;
      }
      throw ScenarioError(body.path(), "unknown function kind");
    });
  }

  void declare(const std::string& name, OperatorPtr op) { named_[name] = std::move(op); }

  OperatorPtr op(const In& in) const {
    if (in.json().is_string()) return lookup(in, in.str());
    const auto [tag, body] = in.tagged();
    if (tag == "ref") return lookup(body, body.str());
    const int n = dim();
    return guarded(in, [&]() -> OperatorPtr {
      if (tag == "finite_graph") {
        std::vector<PairedPoint> pts;
        for (const auto& p : body.items()) pts.push_back(point(p));
        return MonotoneOperator::finite_graph(pair_, std::move(pts));
      }
      if (tag == "linear") return MonotoneOperator::linear(pair_, body.mat(n));
      if (tag == "subdiff") return MonotoneOperator::subdifferential(pair_, function(body));
      if (tag == "normal_cone") return MonotoneOperator::normal_cone(pair_, set(body));
      if (tag == "support_subdiff") return MonotoneOperator::support_subdiff(pair_, set(body, Side::dual));
      if (tag == "tail") {
        if (body.integer(1) != n) body.fail("tail size must equal the space dimension");
        return tail_operator(n, pair_.primal_norm());
      }
      if (tag == "shift") {
        body.keys({"op", "dx", "dxstar"});
        const Vec dx = body.has("dx") ? body.at("dx").vec(n) : Vec::Zero(n);
        const Vec dxs = body.has("dxstar") ? body.at("dxstar").vec(n) : Vec::Zero(n);
        return MonotoneOperator::shift(op(body.at("op")), dx, dxs);
      }
      if (tag == "sum" || tag == "parallel_sum") {
        const auto parts = body.items();
        if (parts.size() != 2) body.fail("expected two operators");
        return tag == "sum" ? MonotoneOperator::sum(op(parts[0]), op(parts[1]))
                            : MonotoneOperator::parallel_sum(op(parts[0]), op(parts[1]));
      }
      if (tag == "inverse") return MonotoneOperator::inverse(op(body));
      throw ScenarioError(body.path(), "unknown operator kind");
    });
  }

  PairedPoint point(const In& in) const {
    in.keys({"x", "xstar"});
    return {in.at("x").vec(dim()), in.at("xstar").vec(dim())};
  }

  LocalWindow window(const In& in, Side side) const {
    const auto [tag, body] = in.tagged();
    return guarded(in, [&]() -> LocalWindow {
      if (tag == "ball") {
        body.keys({"center", "radius"});
        return LocalWindow::ball(body.at("center").vec(dim()), body.at("radius").num(), side);
      }
      if (tag == "polytope") {
        std::vector<Vec> vs;
        for (const auto& p : body.items()) vs.push_back(p.vec(dim()));
        return LocalWindow::polytope(std::move(vs), side);
      }
      throw ScenarioError(body.path(), "unknown window kind");
    });
  }

 private:
  OperatorPtr lookup(const In& where, const std::string& name) const {
    const auto it = named_.find(name);
    if (it == named_.end()) where.fail("unknown operator reference '" + name + "'");
    return it->second;
  }

  DualPair pair_;
  std::map<std::string, OperatorPtr> named_;
};

using TaskFn = std::function<void(std::vector<Record>&)>;

struct Task {
  std::string type;
  TaskFn run;
};

Record base_record(int index, const std::string& type, const std::string& quantity, std::uint64_t seed) {
  Record r;
  r.set("task", std::int64_t{index});
  r.set("type", type);
  r.set("quantity", quantity);
  r.set("seed", static_cast<std::int64_t>(seed));
  return r;
}

std::vector<PairedPoint> probe_points(const Builder& b, const In& t, std::uint64_t seed, int default_count) {
  if (t.has("points")) {
    if (t.has("probes")) throw ScenarioError(t.path() + ".probes", "give either points or probes");
    std::vector<PairedPoint> pts;
    for (const auto& p : t.at("points").items()) pts.push_back(b.point(p));
    return pts;
  }
  const int count = t.has("probes") ? t.at("probes").integer(0) : default_count;
  const double radius = t.has("radius") ? t.at("radius").positive() : 4.0;
  return default_probes(b.dim(), count, seed, radius);
}

Task gap_task(const Builder& b, const In& t, int index) {
  t.keys({"type", "seed", "operator", "probes", "points", "radius", "eta", "dual_fuzz", "primal_fuzz", "budget",
          "starts"});
  const std::uint64_t seed = t.at("seed").seed();
  const OperatorPtr S = b.op(t.at("operator"));
  const auto pts = probe_points(b, t, seed, 100);
  const double eta = t.has("eta") ? t.at("eta").positive() : 1e-6;
  std::optional<CompactConvexSet> dual_fuzz, primal_fuzz;
  if (t.has("dual_fuzz")) dual_fuzz = b.set(t.at("dual_fuzz"), Side::dual);
  if (t.has("primal_fuzz")) primal_fuzz = b.set(t.at("primal_fuzz"));
  GapOptions opts;
  opts.seed = seed;
  if (t.has("budget")) opts.budget = t.at("budget").integer(1);
  if (t.has("starts")) opts.starts = t.at("starts").integer(1);
  return {"gap", [=](std::vector<Record>& out) {
            for (const auto& p : pts) {
              const GapReport g = gap(*S, GapQuery{p, dual_fuzz, primal_fuzz, eta}, opts);
              Record r = base_record(index, "gap", "quasidensity gap", seed);
              r.set("x", to_std(p.x)).set("xstar", to_std(p.xstar));
              r.set("value", g.value).set("status", to_string(g.status)).set("method", to_string(g.method));
              r.set("steps", std::int64_t{g.steps}).set("restarts", std::int64_t{g.restarts});
              r.set("witness_x", to_std(g.witness.x)).set("witness_xstar", to_std(g.witness.xstar));
              r.set("eta", eta).set("pass", g.value <= eta);
              out.push_back(std::move(r));
            }
          }};
}

Task fitz_task(const Builder& b, const In& t, int index) {
  t.keys({"type", "seed", "operator", "probes", "points", "radius", "budget", "tol"});
  const std::uint64_t seed = t.at("seed").seed();
  const OperatorPtr S = b.op(t.at("operator"));
  const auto pts = probe_points(b, t, seed, 20);
  const double tol = t.has("tol") ? t.at("tol").positive() : 1e-7;
  FitzOptions opts;
  opts.seed = seed;
  if (t.has("budget")) opts.budget = t.at("budget").integer(1);
  return {"fitz", [=](std::vector<Record>& out) {
            for (const auto& p : pts) {
              const FitzEvaluation f = phi(*S, p.x, p.xstar, opts);
              // (x*, x) in G(S^F) compares theta_S(x*, x) against the pairing.
              const FitzVerdict m = fitz_membership(*S, p.xstar, p.x, tol, opts);
              Record r = base_record(index, "fitz", "Fitzpatrick function", seed);
              r.set("x", to_std(p.x)).set("xstar", to_std(p.xstar));
              r.set("phi", f.value).set("phi_status", to_string(f.status)).set("phi_upper", f.upper);
              r.set("pairing", pairing(S->pair(), p.x, p.xstar));
              r.set("theta", m.theta).set("theta_upper", m.theta_upper).set("theta_status", to_string(m.status));
              r.set("membership", std::string(membership_string(m.verdict)));
              out.push_back(std::move(r));
            }
          }};
}

void set_verdict(Record& r, const ClassifierVerdict& v) {
  r.set("premise_holds", v.premise_holds).set("worst", v.worst).set("vacuous", v.vacuous);
  r.set("in_window", std::int64_t{v.in_window});
  r.set("conclusion", std::string(membership_string(v.conclusion_holds)));
  r.set("consistent", v.consistent_with_class);
  if (v.witness) r.set("witness_x", to_std(v.witness->x)).set("witness_xstar", to_std(v.witness->xstar));
}

Task classify_task(const Builder& b, const In& t, int index) {
  const std::string cls = t.at("class").str();
  const std::uint64_t seed = t.at("seed").seed();
  const int n = b.dim();
  const int budget = t.has("budget") ? t.at("budget").integer(1) : 400;
  if (cls == "fpv" || cls == "fp") {
    t.keys({"type", "class", "seed", "operator", "budget", "window", "w", "wstar"});
    const OperatorPtr S = b.op(t.at("operator"));
    const bool fpv = cls == "fpv";
    const LocalWindow U = b.window(t.at("window"), fpv ? Side::primal : Side::dual);
    const Vec w = t.at("w").vec(n), ws = t.at("wstar").vec(n);
    return {"classify", [=](std::vector<Record>& out) {
              const auto v = fpv ? check_fpv(*S, U, w, ws, budget, seed) : check_fp(*S, U, w, ws, budget, seed);
              Record r = base_record(index, "classify", fpv ? "FPV windowed check" : "FP windowed check", seed);
              r.set("class", cls).set("w", to_std(w)).set("wstar", to_std(ws)).set("budget", std::int64_t{budget});
              set_verdict(r, v);
              out.push_back(std::move(r));
            }};
  }
  if (cls == "ni") {
    t.keys({"type", "class", "seed", "operator", "budget", "wstar", "wstarstar"});
    const OperatorPtr S = b.op(t.at("operator"));
    const Vec ws = t.at("wstar").vec(n), wss = t.at("wstarstar").vec(n);
    return {"classify", [=](std::vector<Record>& out) {
              const NiResult v = ni_infimum(*S, ws, wss, budget, seed);
              Record r = base_record(index, "classify", "NI infimum", seed);
              r.set("class", cls).set("wstar", to_std(ws)).set("wstarstar", to_std(wss));
              r.set("budget", std::int64_t{budget});
              r.set("value", v.value).set("sampled", v.sampled);
              r.set("dual", v.dual ? Field(*v.dual) : Field());
              r.set("pass", v.value <= 1e-9);
              if (v.witness) r.set("witness_x", to_std(v.witness->x)).set("witness_xstar", to_std(v.witness->xstar));
              out.push_back(std::move(r));
            }};
  }
  if (cls == "strongmax") {
    t.keys({"type", "class", "seed", "operator", "budget", "side", "set", "w", "wstar"});
    const OperatorPtr S = b.op(t.at("operator"));
    const std::string side = t.at("side").str();
    if (side != "dual" && side != "primal") throw ScenarioError(t.path() + ".side", "expected dual or primal");
    const bool dual_side = side == "dual";
    const CompactConvexSet K = b.set(t.at("set"), dual_side ? Side::dual : Side::primal);
    const Vec anchor = dual_side ? t.at("w").vec(n) : t.at("wstar").vec(n);
    if (t.has(dual_side ? "wstar" : "w")) {
      throw ScenarioError(t.path() + (dual_side ? ".wstar" : ".w"), "not used on this side");
    }
    return {"classify", [=](std::vector<Record>& out) {
              const auto v = dual_side ? strong_max_dual(*S, anchor, K, budget, seed)
                                       : strong_max_primal(*S, K, anchor, budget, seed);
              Record r = base_record(index, "classify", "strong maximality", seed);
              r.set("class", cls).set("side", side).set(dual_side ? "w" : "wstar", to_std(anchor));
              r.set("budget", std::int64_t{budget});
              r.set("premise_holds", v.premise_holds).set("worst", v.worst);
              r.set("outcome", std::string(to_string(v.outcome)));
              r.set("found", v.found ? Field(to_std(*v.found)) : Field());
              r.set("residual", v.residual).set("samples", std::int64_t{v.samples});
              out.push_back(std::move(r));
            }};
  }
  if (cls == "seqchar") {
    t.keys({"type", "class", "seed", "operator", "zstar", "zstarstar", "sequence", "w", "wstar", "tol"});
    const OperatorPtr S = b.op(t.at("operator"));
    const Vec zs = t.at("zstar").vec(n), zss = t.at("zstarstar").vec(n);
    const Vec w = t.has("w") ? t.at("w").vec(n) : Vec::Zero(n);
    const Vec ws = t.has("wstar") ? t.at("wstar").vec(n) : Vec::Zero(n);
    const double tol = t.has("tol") ? t.at("tol").positive() : 1e-7;
    std::vector<PairedPoint> seq;
    for (const auto& p : t.at("sequence").items()) seq.push_back(b.point(p));
    return {"classify", [=](std::vector<Record>& out) {
              const SeqcharVerdict v = seqchar_check(*S, zs, zss, seq, w, ws, tol);
              Record r = base_record(index, "classify", "sequential characterization", seed);
              r.set("class", cls).set("terms", static_cast<std::int64_t>(seq.size()));
              r.set("consistent", v.consistent);
              r.set("counterexample", v.counterexample ? Field(std::int64_t{*v.counterexample}) : Field());
              r.set("pairing_error", v.pairing_error).set("dual_error", v.dual_error);
              out.push_back(std::move(r));
            }};
  }
  throw ScenarioError(t.path() + ".class", "unknown class '" + cls + "'");
}

void set_br(Record& r, const BRResult& br) {
  r.set("s", to_std(br.s)).set("xstar", to_std(br.xstar));
  r.set("slack_value", br.slack_value).set("slack_dist", br.slack_dist).set("slack_slope", br.slack_slope);
  r.set("slack_inf", br.slack_inf ? Field(*br.slack_inf) : Field());
  r.set("membership", std::string(membership_string(br.membership)));
  r.set("ok", br.ok).set("iterations", std::int64_t{br.iterations}).set("warning", br.warning);
}

void set_van(Record& r, const VanResult& v) {
  r.set("x", to_std(v.point.x)).set("xstar", to_std(v.point.xstar));
  r.set("value", v.quantity).set("M", v.M).set("beta", v.beta);
  r.set("membership", std::string(membership_string(v.membership)));
  r.set("flagged", v.flagged).set("br_ok", v.br.ok);
}

Task br_task(const Builder& b, const In& t, int index) {
  const std::string mode = t.at("mode").str();
  const std::uint64_t seed = t.at("seed").seed();
  const int n = b.dim();
  const NormTag norm = b.pair().primal_norm();
  if (mode == "point") {
    t.keys({"type", "mode", "seed", "function", "u", "alpha", "beta"});
    const ConvexFn h = b.function(t.at("function"));
    const Vec u = t.at("u").vec(n);
    const double alpha = t.has("alpha") ? t.at("alpha").positive() : 1.0;
    const double beta = t.has("beta") ? t.at("beta").positive() : 1.0;
    return {"br", [=](std::vector<Record>& out) {
              const BRResult br = br_point({h, u, alpha, beta, norm});
              Record r = base_record(index, "br", "BR certificate", seed);
              r.set("mode", mode).set("u", to_std(u)).set("alpha", alpha).set("beta", beta);
              set_br(r, br);
              out.push_back(std::move(r));
            }};
  }
  if (mode == "corollary") {
    t.keys({"type", "mode", "seed", "function", "beta"});
    const ConvexFn h = b.function(t.at("function"));
    const double beta = t.at("beta").positive();
    return {"br", [=](std::vector<Record>& out) {
              const BRResult br = br_corollary(h, beta, norm);
              Record r = base_record(index, "br", "BR certificate", seed);
              r.set("mode", mode).set("beta", beta);
              set_br(r, br);
              out.push_back(std::move(r));
            }};
  }
  if (mode == "van" || mode == "witness") {
    const bool van = mode == "van";
    if (van) {
      t.keys({"type", "mode", "seed", "function", "eps"});
    } else {
      t.keys({"type", "mode", "seed", "function", "eps", "x", "xstar"});
    }
    const ConvexFn f = b.function(t.at("function"));
    const double eps = t.has("eps") ? t.at("eps").positive() : 1e-6;
    const Vec x = van ? Vec::Zero(n) : t.at("x").vec(n);
    const Vec xs = van ? Vec::Zero(n) : t.at("xstar").vec(n);
    return {"br", [=](std::vector<Record>& out) {
              const VanResult v = van ? van_point(f, eps, norm) : quasidense_witness(f, x, xs, eps, norm);
              Record r = base_record(index, "br", "quasidense witness", seed);
              r.set("mode", mode).set("eps", eps);
              if (!van) r.set("target_x", to_std(x)).set("target_xstar", to_std(xs));
              set_van(r, v);
              r.set("pass", v.quantity < eps && v.membership == Tri::yes);
              out.push_back(std::move(r));
            }};
  }
  throw ScenarioError(t.path() + ".mode", "unknown mode '" + mode + "'");
}

Task tail_task(const In& t, int index) {
  t.keys({"type", "seed", "n", "probe", "starts", "max_steps"});
  const std::uint64_t seed = t.at("seed").seed();
  std::vector<int> ns;
  for (const auto& v : t.at("n").items()) ns.push_back(v.integer(1));
  // Constant-entry probes, padded to each n.
  std::optional<std::pair<double, double>> probe;
  if (t.has("probe")) {
    const In p = t.at("probe");
    p.keys({"x", "xstar"});
    probe = std::make_pair(p.at("x").num(), p.at("xstar").num());
  }
  GapOptions opts;
  if (t.has("starts")) opts.starts = t.at("starts").integer(1);
  if (t.has("max_steps")) opts.max_steps = t.at("max_steps").integer(1);
  return {"tail_experiment", [=](std::vector<Record>& out) {
            for (int n : ns) {
              std::optional<PairedPoint> pt;
              if (probe) pt = PairedPoint{Vec::Constant(n, probe->first), Vec::Constant(n, probe->second)};
              const TailRow row = tail_experiment({n}, seed, pt, opts).front();
              Record r = base_record(index, "tail_experiment", "tail gap bound", seed);
              r.set("n", std::int64_t{row.n});
              if (!row.error.empty()) {
                r.set("error", row.error);
              } else {
                r.set("gap_bound", row.gap.value).set("steps", std::int64_t{row.gap.steps});
                r.set("restarts", std::int64_t{row.gap.restarts}).set("method", to_string(row.gap.method));
                r.set("status", to_string(row.gap.status));
                r.set("witness_x", to_std(row.gap.witness.x)).set("witness_xstar", to_std(row.gap.witness.xstar));
              }
              out.push_back(std::move(r));
            }
          }};
}

Task sum_task(const Builder& b, const In& t, int index) {
  t.keys({"type", "seed", "S", "T", "mode", "probes", "eta", "budget"});
  const std::uint64_t seed = t.at("seed").seed();
  const OperatorPtr S = b.op(t.at("S"));
  const OperatorPtr T = b.op(t.at("T"));
  const std::string mode = t.has("mode") ? t.at("mode").str() : "domain";
  if (mode != "domain" && mode != "range") throw ScenarioError(t.path() + ".mode", "expected domain or range");
  const int probes = t.has("probes") ? t.at("probes").integer(0) : 50;
  const double eta = t.has("eta") ? t.at("eta").positive() : 1e-6;
  const int budget = t.has("budget") ? t.at("budget").integer(1) : 200;
  return {"sum_test", [=](std::vector<Record>& out) {
            const auto res = sum_test(S, T, mode == "domain" ? SumMode::domain : SumMode::range, probes, seed, eta,
                                      budget);
            Record r = base_record(index, "sum_test", "sum quasidensity sweep", seed);
            r.set("mode", mode).set("eta", eta).set("skipped", res.skipped).set("reason", res.reason);
            r.set("witness", res.witness ? Field(to_std(*res.witness)) : Field());
            r.set("probes", std::int64_t{res.probes}).set("passed", std::int64_t{res.passed});
            r.set("max_gap", res.max_gap).set("pass", res.pass);
            out.push_back(std::move(r));
          }};
}

std::string position(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

Report run_scenario_text(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ScenarioError(position(text, e.byte), "JSON syntax error");
  }
  const In root(doc, "");
  root.keys({"schema", "space", "operators", "tasks"});
  if (root.at("schema").integer() != 1) throw ScenarioError("schema", "unsupported schema version");
  const In space = root.at("space");
  space.keys({"dim", "norm"});
  const int dim = space.at("dim").integer(1);
  const NormTag norm = space.has("norm") ? space.at("norm").norm_tag() : NormTag::L2;
  Builder b(DualPair(dim, norm));

  if (root.has("operators")) {
    const In ops = root.at("operators");
    if (!ops.json().is_object()) ops.fail("expected an object");
    for (const auto& [name, body] : ops.json().items()) b.declare(name, b.op(In(body, "operators." + name)));
  }

  std::vector<Task> tasks;
  for (const auto& t : root.at("tasks").items()) {
    const int index = static_cast<int>(tasks.size());
    const std::string type = t.at("type").str();
    if (type == "gap") {
      tasks.push_back(gap_task(b, t, index));
    } else if (type == "fitz") {
      tasks.push_back(fitz_task(b, t, index));
    } else if (type == "classify") {
      tasks.push_back(classify_task(b, t, index));
    } else if (type == "br") {
      tasks.push_back(br_task(b, t, index));
    } else if (type == "tail_experiment") {
      tasks.push_back(tail_task(t, index));
    } else if (type == "sum_test") {
      tasks.push_back(sum_task(b, t, index));
    } else {
      throw ScenarioError(t.path() + ".type", "unknown task type '" + type + "'");
    }
  }

  Report report;
  for (const auto& task : tasks) {
    TaskOutcome outcome;
    outcome.type = task.type;
    std::vector<Record> recs;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      task.run(recs);
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
    }
    outcome.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    outcome.records = static_cast<int>(recs.size());
    for (auto& r : recs) report.records.push_back(std::move(r));
    report.tasks.push_back(std::move(outcome));
  }
  return report;
}

Report run_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_scenario_text(buf.str());
}

}  // namespace monolab
