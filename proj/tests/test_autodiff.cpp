#include <cmath>
#include <numeric>

#include "doctest.h"
#include "qa4ie/ad/adadelta.hpp"
#include "qa4ie/ad/checkpoint.hpp"
#include "qa4ie/ad/gradcheck.hpp"
#include "qa4ie/ad/graph.hpp"

using namespace qa4ie;
using namespace qa4ie::ad;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

double sum_of(const Tensor& t) { return std::accumulate(t.data().begin(), t.data().end(), 0.0); }

// Gradient check over a one-off parameter set.
double check(ParameterSet& ps, const LossBuilder& build) {
  auto all = ps.all();
  return finite_difference_check(build, all).max_rel_error;
}

}  // namespace

TEST_CASE("relu and sigmoid values") {
  Graph g;
  Var x = g.constant(Tensor::row({-1, 0, 2}));
  CHECK(relu(x).value().values() == std::vector<double>{0, 0, 2});
  CHECK(sigmoid(g.constant(Tensor::scalar(0))).value().item() == doctest::Approx(0.5));
}

TEST_CASE("matmul agrees with a triple loop") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = rng.between(1, 6), k = rng.between(1, 6), m = rng.between(1, 6);
    Tensor a = random_matrix(n, k, rng), b = random_matrix(k, m, rng);
    Graph g;
    Tensor c = matmul(g.constant(a), g.constant(b)).value();
    REQUIRE(c.shape() == Shape{n, m});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0;
        for (std::size_t e = 0; e < k; ++e) s += a(i, e) * b(e, j);
        CHECK(c(i, j) == doctest::Approx(s).epsilon(1e-14));
      }
  }
  Graph g;
  CHECK(matmul(g.constant(Tensor::matrix(2, 3)), g.constant(Tensor::matrix(3, 4))).value().shape() == Shape{2, 4});
}

TEST_CASE("shape errors name the shapes") {
  Graph g;
  try {
    matmul(g.constant(Tensor::matrix(2, 3)), g.constant(Tensor::matrix(2, 3)));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2,3)") != std::string::npos);
  }
  CHECK_THROWS_AS(add(g.constant(Tensor::matrix(2, 3)), g.constant(Tensor::matrix(3, 2))), ShapeError);
  CHECK_THROWS_AS(slice_rows(g.constant(Tensor::matrix(2, 3)), 1, 3), ShapeError);
}

TEST_CASE("broadcasting add") {
  Graph g;
  Var a = g.constant(Tensor({2, 2}, {1, 2, 3, 4}));
  Var b = g.constant(Tensor::row({10, 20}));
  CHECK(add(a, b).value().values() == std::vector<double>{11, 22, 13, 24});
  Var c = g.constant(Tensor({2, 1}, {100, 200}));
  CHECK(add(a, c).value().values() == std::vector<double>{101, 102, 203, 204});
}

TEST_CASE("softmax contract") {
  auto p = softmax(std::vector<double>{1, 1, 1});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3));
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double x = rng.uniform(-50, 50), c = rng.uniform(-3, 3);
    auto a = softmax(std::vector<double>{x, x + c, x + 2 * c});
    auto b = softmax(std::vector<double>{0, c, 2 * c});
    double total = 0;
    for (int i = 0; i < 3; ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
      total += a[i];
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  auto big = softmax(std::vector<double>{1000, 0});
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(big[1] >= 0.0);
  CHECK(big[1] < 1e-300 + 1e-12);
  CHECK_THROWS(softmax(std::vector<double>{}));
  CHECK(argmax(std::vector<double>{1, 3, 3, 2}) == 1);
}

TEST_CASE("backward basics") {
  ParameterSet ps;
  Parameter& x = ps.add("x", Tensor::scalar(3));
  {
    Graph g;
    Var v = g.parameter(x);
    g.backward(mul(v, v));
    CHECK(x.grad.item() == doctest::Approx(6));
    g.backward(mul(v, v));
    CHECK(x.grad.item() == doctest::Approx(12));  // accumulates
  }
  Parameter& y = ps.add("y", Tensor::matrix(1, 4));
  Graph g;
  g.backward(sum(sigmoid(g.parameter(y))));
  for (double v : y.grad.data()) CHECK(v == doctest::Approx(0.25));
  CHECK_THROWS_AS(g.backward(sigmoid(g.parameter(y))), ShapeError);
}

TEST_CASE("parameter leaves are shared within a graph") {
  ParameterSet ps;
  Parameter& x = ps.add("x", Tensor::scalar(2));
  Graph g;
  CHECK(g.parameter(x).id == g.parameter(x).id);
  g.backward(add(g.parameter(x), g.parameter(x)));
  CHECK(x.grad.item() == doctest::Approx(2));
}

TEST_CASE("concat splits gradients exactly") {
  Rng rng(11);
  ParameterSet ps;
  Parameter& a = ps.add("a", random_matrix(3, 2, rng));
  Parameter& b = ps.add("b", random_matrix(3, 4, rng));
  Parameter& w = ps.add("w", random_matrix(3, 6, rng));
  Graph g;
  const Var parts[] = {g.parameter(a), g.parameter(b)};
  Var cat = concat_cols(parts);
  g.backward(sum(mul(cat, g.parameter(w))));
  Tensor out = g.grad(cat);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(a.grad(r, c) == out(r, c));
    for (std::size_t c = 0; c < 4; ++c) CHECK(b.grad(r, c) == out(r, 2 + c));
  }
}

TEST_CASE("gradient check on every primitive") {
  Rng rng(5);
  ParameterSet ps;
  Parameter& a = ps.add("a", random_matrix(3, 4, rng));
  Parameter& b = ps.add("b", random_matrix(4, 2, rng));
  Parameter& r = ps.add("r", random_matrix(1, 4, rng));
  Parameter& pos = ps.add("pos", random_matrix(3, 4, rng));
  for (double& v : pos.value.data()) v = std::abs(v) + 0.5;
  Parameter& w = ps.add("w", random_matrix(1, 4, rng));
  Parameter& q = ps.add("q", random_matrix(2, 4, rng));
  Parameter& table = ps.add("table", random_matrix(5, 3, rng));

  auto run = [&](const std::string& name, auto body) {
    CAPTURE(name);
    CHECK(check(ps, [&](Graph& g) { return body(g); }) < 1e-6);
  };
  // A fixed random weighting keeps every output coordinate in the loss.
  auto weigh = [&](Graph& g, Var x) {
    Rng wr(99);
    return sum(mul(x, g.constant(random_matrix(x.rows(), x.cols(), wr))));
  };
  run("matmul", [&](Graph& g) { return weigh(g, matmul(g.parameter(a), g.parameter(b))); });
  run("transpose", [&](Graph& g) { return weigh(g, transpose(g.parameter(a))); });
  run("reshape", [&](Graph& g) { return weigh(g, reshape(g.parameter(a), 6, 2)); });
  run("add", [&](Graph& g) { return weigh(g, add(g.parameter(a), g.parameter(r))); });
  run("sub", [&](Graph& g) { return weigh(g, sub(g.parameter(r), g.parameter(a))); });
  run("mul", [&](Graph& g) { return weigh(g, mul(g.parameter(a), g.parameter(r))); });
  run("affine", [&](Graph& g) { return weigh(g, affine(g.parameter(a), -1.5, 2.0)); });
  run("sigmoid", [&](Graph& g) { return weigh(g, sigmoid(g.parameter(a))); });
  run("tanh", [&](Graph& g) { return weigh(g, ad::tanh(g.parameter(a))); });
  run("relu", [&](Graph& g) { return weigh(g, relu(g.parameter(a))); });
  run("log", [&](Graph& g) { return weigh(g, ad::log(g.parameter(pos))); });
  run("softmax", [&](Graph& g) { return weigh(g, softmax(g.parameter(a))); });
  run("log_softmax", [&](Graph& g) { return weigh(g, log_softmax(g.parameter(a))); });
  run("concat_rows", [&](Graph& g) {
    const Var parts[] = {g.parameter(a), g.parameter(r)};
    return weigh(g, concat_rows(parts));
  });
  run("slices", [&](Graph& g) { return weigh(g, slice_cols(slice_rows(g.parameter(a), 1, 3), 1, 4)); });
  run("max_pool_rows", [&](Graph& g) { return weigh(g, max_pool_rows(reshape(g.parameter(a), 6, 2), 3)); });
  run("max_cols", [&](Graph& g) { return weigh(g, max_cols(g.parameter(a))); });
  run("pick", [&](Graph& g) { return pick(softmax(g.parameter(a)), 2, 1); });
  run("gather_rows", [&](Graph& g) {
    const std::size_t ids[] = {4, 0, 4, 2};
    return weigh(g, gather_rows(g.parameter(table), ids));
  });
  run("additive_attention", [&](Graph& g) {
    return weigh(g, additive_attention(g.parameter(a), g.parameter(q), g.parameter(w)));
  });
}

TEST_CASE("additive attention agrees with nested loops") {
  Rng rng(21);
  Tensor keys = random_matrix(5, 3, rng), queries = random_matrix(2, 3, rng), w = random_matrix(1, 3, rng);
  Graph g;
  Tensor out = additive_attention(g.constant(keys), g.constant(queries), g.constant(w)).value();
  REQUIRE(out.shape() == Shape{2, 5});
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0;
      for (std::size_t e = 0; e < 3; ++e) s += w[e] * std::tanh(keys(j, e) + queries(t, e));
      CHECK(out(t, j) == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("non-finite values are rejected") {
  Graph g;
  CHECK_THROWS_AS(ad::log(g.constant(Tensor::row({1.0, 0.0}))), NumericError);
  CHECK_THROWS_AS(g.constant(Tensor::row({std::nan("")})), NumericError);
}

TEST_CASE("quadratic bowl gradcheck is near exact") {
  Rng rng(1);
  ParameterSet ps;
  Parameter& x = ps.add("x", random_matrix(1, 6, rng));
  auto all = ps.all();
  auto res = finite_difference_check([&](Graph& g) {
    Var v = g.parameter(x);
    return sum(mul(v, v));
  }, all);
  CHECK(res.max_rel_error < 1e-7);
  CHECK(res.checked == 6);
  CHECK(x.grad.shape() == x.value.shape());
}

TEST_CASE("gradcheck reports a non-finite loss with its coordinate") {
  ParameterSet ps;
  Parameter& x = ps.add("x", Tensor::row({1e-6, 1.0}));
  auto all = ps.all();
  try {
    finite_difference_check([&](Graph& g) { return sum(ad::log(g.parameter(x))); }, all, {1e-5});
    FAIL("expected throw");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("x[0]") != std::string::npos);
  }
}

TEST_CASE("dropout") {
  Rng rng(4);
  Graph g;
  Var ones = g.constant(Tensor::matrix(1, 100000, 1.0));
  CHECK(dropout(ones, 0.0, true, rng).value() == ones.value());
  CHECK(dropout(ones, 0.5, false, rng).value() == ones.value());
  Tensor d = dropout(ones, 0.2, true, rng).value();
  CHECK(std::abs(sum_of(d) / 100000.0 - 1.0) < 0.01);
  for (double v : d.data()) CHECK((v == 0.0 || v == doctest::Approx(1.25)));
  CHECK_THROWS(dropout(ones, 1.0, true, rng));
  CHECK_THROWS(dropout(ones, -0.1, true, rng));
}

namespace {

// Scalar reference AdaDelta.
struct ScalarAdaDelta {
  double rho, eps, lr, eg = 0, eu = 0;
  double step(double g) {
    eg = rho * eg + (1 - rho) * g * g;
    const double u = std::sqrt(eu + eps) / std::sqrt(eg + eps) * g;
    eu = rho * eu + (1 - rho) * u * u;
    return -lr * u;
  }
};

}  // namespace

TEST_CASE("adadelta matches a scalar reference") {
  ParameterSet ps;
  Parameter& p = ps.add("p", Tensor::scalar(0.0));
  AdaDelta opt({0.95, 1e-6, 1.0});
  ScalarAdaDelta ref{0.95, 1e-6, 1.0};
  p.grad = Tensor::scalar(1.0);
  opt.step(ps);
  const double d1 = p.value.item();
  CHECK(d1 == doctest::Approx(-std::sqrt(1e-6) / std::sqrt(0.05 + 1e-6)).epsilon(1e-12));
  CHECK(d1 == doctest::Approx(ref.step(1.0)).epsilon(1e-14));
  opt.step(ps);
  const double d2 = p.value.item() - d1;
  CHECK(d2 == doctest::Approx(ref.step(1.0)).epsilon(1e-12));
  CHECK(std::abs(d2) >= std::abs(d1));
  CHECK(opt.slot("p").acc_grad_sq.shape() == p.value.shape());

  Rng rng(8);
  ScalarAdaDelta ref2{0.9, 1e-6, 2.0};
  Parameter& q = ps.add("q", Tensor::scalar(0.3));
  AdaDelta opt2({0.9, 1e-6, 2.0});
  double expect = 0.3;
  for (int i = 0; i < 50; ++i) {
    const double gq = rng.uniform(-2, 2);
    ps.zero_grad();
    q.grad = Tensor::scalar(gq);
    opt2.step(ps);
    expect += ref2.step(gq);
    CHECK(q.value.item() == doctest::Approx(expect).epsilon(1e-12));
  }
  for (double v : opt2.slot("q").acc_update_sq.data()) CHECK(v >= 0.0);
}

TEST_CASE("adadelta edge cases") {
  ParameterSet ps;
  Parameter& p = ps.add("p", Tensor::row({1, 2, 3}));
  AdaDelta opt;
  opt.step(ps);  // zero grads
  CHECK(p.value.values() == std::vector<double>{1, 2, 3});
  AdaDelta frozen({0.95, 1e-6, 0.0});
  p.grad = Tensor::row({1, -1, 5});
  frozen.step(ps);
  CHECK(p.value.values() == std::vector<double>{1, 2, 3});
  p.grad = Tensor::row({1, std::nan(""), 5});
  CHECK_THROWS_AS(opt.step(ps), NumericError);
  CHECK(p.value.values() == std::vector<double>{1, 2, 3});
}

TEST_CASE("checkpoint round trip is bitwise") {
  Rng rng(2);
  ParameterSet ps;
  ps.add("a.b", random_matrix(3, 5, rng, 1e3));
  ps.add("scalar", Tensor::scalar(-0.0));
  ps.add("tiny", Tensor::row({5e-324, 1.0 / 3.0}));
  std::vector<NamedTensor> recs;
  for (const Parameter* p : std::as_const(ps).all()) recs.push_back({p->name, p->value});
  const std::string bytes = encode_checkpoint(recs);
  CHECK(bytes.substr(0, 12) == "QA4IE-CKPT-1");
  CHECK(encode_checkpoint(decode_checkpoint(bytes)) == bytes);
  auto decoded = decode_checkpoint(bytes);
  REQUIRE(decoded.size() == 3);
  CHECK(std::signbit(decoded[1].value.item()));

  ParameterSet other;
  other.add("a.b", Tensor::matrix(3, 5));
  other.add("scalar", Tensor::scalar(1));
  other.add("tiny", Tensor::row({0, 0}));
  assign_records(decoded, other);
  for (std::size_t i = 0; i < 3; ++i) CHECK(other[i].value == ps[i].value);

  ParameterSet wrong;
  wrong.add("a.b", Tensor::matrix(5, 3));
  wrong.add("scalar", Tensor::scalar(1));
  wrong.add("tiny", Tensor::row({0, 0}));
  CHECK_THROWS_WITH_AS(assign_records(decoded, wrong), doctest::Contains("a.b"), std::exception);
  CHECK_THROWS(decode_checkpoint(bytes.substr(0, bytes.size() - 1)));
  CHECK_THROWS(decode_checkpoint("NOT-A-CHECKPOINT"));
}

TEST_CASE("forward values are deterministic") {
  auto run = [] {
    Rng rng(42);
    Graph g;
    Var a = g.constant(random_matrix(4, 4, rng));
    return softmax(matmul(ad::tanh(a), dropout(a, 0.3, true, rng))).value();
  };
  CHECK(run() == run());
}
