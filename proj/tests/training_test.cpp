#include "gnnsafe/training.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gnnsafe/generators.hpp"
#include "gnnsafe/gradcheck.hpp"
#include "test_support.hpp"

using namespace gnnsafe;

namespace {

/// Small planted benchmark with an exposure unit, shared by the train tests.
Benchmark small_benchmark(std::uint64_t seed) {
  const auto g = testsupport::planted_graph(seed, 60, 2, 0.25, 0.02, 4, 2.0, 0.5);
  return gen_structure_ood(g, seed);
}

EncoderConfig small_encoder(std::size_t classes) {
  EncoderConfig cfg;
  cfg.out_classes = classes;
  cfg.hidden = 8;
  return cfg;
}

}  // namespace

TEST(SupLoss, UniformLogitsGiveLogC) {
  const DenseMatrix logits(5, 7, 0.0);
  const std::vector<std::int32_t> labels = {0, 1, 2, 3, 4};
  const SupLoss l = sup_loss(logits, labels, {0, 1, 2, 3, 4});
  EXPECT_NEAR(l.mean, std::log(7.0), 1e-12);
  EXPECT_NEAR(l.sum, 5.0 * std::log(7.0), 1e-12);
  // grad = softmax - onehot = 1/7 - 1{c=y} inside the mask.
  EXPECT_NEAR(l.grad(0, 0), 1.0 / 7.0 - 1.0, 1e-12);
  EXPECT_NEAR(l.grad(0, 1), 1.0 / 7.0, 1e-12);
}

TEST(SupLoss, ConfidentCorrectLogitsDriveLossToZero) {
  DenseMatrix logits(2, 3, 0.0);
  logits(0, 1) = 40.0;
  logits(1, 2) = 40.0;
  const SupLoss l = sup_loss(logits, {1, 2}, {0, 1});
  EXPECT_LT(l.mean, 1e-12);
}

TEST(SupLoss, SkipsRowsOutsideMaskAndValidates) {
  const DenseMatrix logits(3, 2, 0.0);
  const std::vector<std::int32_t> labels = {0, -1, 1};
  const SupLoss l = sup_loss(logits, labels, {0, 2});
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(l.grad(1, c), 0.0);
  EXPECT_THROW(sup_loss(logits, labels, {1}), std::invalid_argument);
  EXPECT_THROW(sup_loss(logits, labels, {}), std::invalid_argument);
}

TEST(SupLoss, GradientMatchesFiniteDifference) {
  Rng rng(71);
  DenseMatrix logits(4, 3);
  for (double& v : logits.data()) v = rng.uniform(-2.0, 2.0);
  const std::vector<std::int32_t> labels = {2, 0, 1, 1};
  const std::vector<std::size_t> mask = {0, 2, 3};
  const SupLoss l = sup_loss(logits, labels, mask);
  const auto f = [&](const std::vector<double>& flat) {
    DenseMatrix m(4, 3);
    m.data() = flat;
    return sup_loss(m, labels, mask).sum;
  };
  EXPECT_LT(finite_diff_check(f, logits.data(), l.grad.data()), 1e-6);
}

TEST(RegLoss, InactiveHingesGiveZero) {
  // All id energies below t_in, all ood energies above t_out.
  const RegLoss r = reg_loss({-9.0, -8.0}, {-1.0, -0.5}, -7.0, -2.0);
  EXPECT_EQ(r.loss, 0.0);
  for (const double g : r.grad_id) EXPECT_EQ(g, 0.0);
  for (const double g : r.grad_ood) EXPECT_EQ(g, 0.0);
}

TEST(RegLoss, SingleUnitViolationScoresOneOverN) {
  // One id energy exceeds t_in by exactly 1: loss = 1^2 / |I_s|.
  const RegLoss r = reg_loss({-6.0, -8.0, -9.0}, {-1.0}, -7.0, -2.0);
  EXPECT_DOUBLE_EQ(r.loss, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.grad_id[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.grad_id[1], 0.0);

  const RegLoss ro = reg_loss({-9.0}, {-3.0, -1.0}, -7.0, -2.0);
  EXPECT_DOUBLE_EQ(ro.loss, 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(ro.grad_ood[0], -2.0 / 2.0);
  EXPECT_DOUBLE_EQ(ro.grad_ood[1], 0.0);
}

TEST(RegLoss, GradientMatchesFiniteDifferenceAndValidates) {
  const std::vector<double> e_id = {-5.0, -7.5, -6.2};
  const std::vector<double> e_ood = {-3.5, -1.0};
  const RegLoss r = reg_loss(e_id, e_ood, -7.0, -2.0);
  const auto f = [&](const std::vector<double>& x) {
    const std::vector<double> a(x.begin(), x.begin() + 3);
    const std::vector<double> b(x.begin() + 3, x.end());
    return reg_loss(a, b, -7.0, -2.0).loss;
  };
  std::vector<double> x = e_id;
  x.insert(x.end(), e_ood.begin(), e_ood.end());
  std::vector<double> g = r.grad_id;
  g.insert(g.end(), r.grad_ood.begin(), r.grad_ood.end());
  EXPECT_LT(finite_diff_check(f, x, g), 1e-6);

  EXPECT_THROW(reg_loss(e_id, e_ood, -2.0, -2.0), std::invalid_argument);
  EXPECT_THROW(reg_loss({}, e_ood, -7.0, -2.0), std::invalid_argument);
}

TEST(Adam, ZeroGradLeavesParamsAlone) {
  std::vector<double> p = {1.0, -2.0};
  AdamState s;
  adam_step(p, {0.0, 0.0}, s, 0.1, 0.0, {1, 1});
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  std::vector<double> p = {1.0, 1.0};
  AdamState s;
  adam_step(p, {0.3, -0.7}, s, 0.05, 0.0, {1, 1});
  EXPECT_NEAR(p[0], 1.0 - 0.05, 1e-6);
  EXPECT_NEAR(p[1], 1.0 + 0.05, 1e-6);
}

TEST(Adam, MatchesScalarSimulationAndConverges) {
  // Minimize w^2 from w0 = 1 at lr 0.1; independently simulated scalar Adam.
  std::vector<double> p = {1.0};
  AdamState s;
  double w = 1.0, m = 0.0, v = 0.0;
  const double om1 = 1.0 - 0.9, om2 = 1.0 - 0.999;  // match the update's rounding
  for (int t = 1; t <= 200; ++t) {
    const double g = 2.0 * p[0];
    adam_step(p, {g}, s, 0.1, 0.0, {1});
    const double gw = 2.0 * w;
    m = 0.9 * m + om1 * gw;
    v = 0.999 * v + om2 * gw * gw;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    w -= 0.1 * (mhat / (std::sqrt(vhat) + 1e-8));
    ASSERT_DOUBLE_EQ(p[0], w);
  }
  EXPECT_LT(std::abs(p[0]), 1e-3);
}

TEST(Adam, DecoupledDecayUsesMaskAndPreUpdateValue) {
  std::vector<double> p = {2.0, 2.0};
  AdamState s;
  adam_step(p, {0.0, 0.0}, s, 0.1, 0.5, {1, 0});
  EXPECT_DOUBLE_EQ(p[0], 2.0 - 0.1 * 0.5 * 2.0);  // 1.9
  EXPECT_DOUBLE_EQ(p[1], 2.0);
  EXPECT_THROW(adam_step(p, {0.0}, s, 0.1, 0.0, {1}), std::invalid_argument);
}

TEST(TrainConfig, ValidatesThresholdOrderOnlyWhenRegularizing) {
  TrainConfig tc;
  tc.t_in = -2.0;
  tc.t_out = -7.0;
  EXPECT_NO_THROW(tc.validate());  // thresholds unused without regularization
  tc.use_regularization = true;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  tc.t_in = -7.0;
  tc.t_out = -2.0;
  EXPECT_NO_THROW(tc.validate());
  tc.lr = 0.0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
}

TEST(Train, CombinedObjectiveGradientMatchesFiniteDifference) {
  // Single linear gcn layer: the only kinks are the regularizer hinges, kept
  // active with a wide margin by extreme thresholds.
  const Benchmark bench = small_benchmark(5);
  EncoderConfig cfg;
  cfg.layers = 1;
  cfg.out_classes = 2;
  cfg.use_feature_norm = false;
  const Graph& id = *bench.id_graph;
  const Graph& expo = *bench.ood_exposure->graph;
  const SparseMatrix norm_id = sym_normalize(id.adjacency, true);
  const SparseMatrix norm_ex = sym_normalize(expo.adjacency, true);
  const double lambda = 0.8, alpha = 0.5, t_in = -10.0, t_out = 5.0;
  const std::size_t K = 2;
  EncoderParams params = init_params(cfg, id.num_features(), 3);

  const auto objective = [&](const std::vector<double>& flat) {
    EncoderParams q = params;
    unflatten(q, flat);
    const ForwardCache c = forward(q, cfg, id.features, &norm_id);
    const SupLoss sup = sup_loss(c.logits, id.labels, bench.splits.train);
    const EnergyVector e_id = propagate_energy(node_energy(c.logits), id.adjacency, alpha, K);
    const ForwardCache ce = forward(q, cfg, expo.features, &norm_ex);
    const EnergyVector e_ood =
        propagate_energy(node_energy(ce.logits), expo.adjacency, alpha, K);
    const RegLoss rl =
        reg_loss(detail::gather(e_id.values, bench.splits.train),
                 detail::gather(e_ood.values, bench.ood_exposure->ood_mask), t_in, t_out);
    return sup.sum + lambda * rl.loss;
  };

  // Analytic gradient assembled the same way train() does.
  const ForwardCache c = forward(params, cfg, id.features, &norm_id);
  const SupLoss sup = sup_loss(c.logits, id.labels, bench.splits.train);
  DenseMatrix grad_logits = sup.grad;
  const EnergyVector e_id = propagate_energy(node_energy(c.logits), id.adjacency, alpha, K);
  const ForwardCache ce = forward(params, cfg, expo.features, &norm_ex);
  const EnergyVector e_ood =
      propagate_energy(node_energy(ce.logits), expo.adjacency, alpha, K);
  const RegLoss rl =
      reg_loss(detail::gather(e_id.values, bench.splits.train),
               detail::gather(e_ood.values, bench.ood_exposure->ood_mask), t_in, t_out);

  std::vector<double> g_prop(id.num_nodes, 0.0);
  for (std::size_t k = 0; k < bench.splits.train.size(); ++k)
    g_prop[bench.splits.train[k]] = lambda * rl.grad_id[k];
  const std::vector<double> g_raw = propagate_pullback(g_prop, id.adjacency, alpha, K);
  const DenseMatrix sm = softmax_rows(c.logits);
  for (std::size_t i = 0; i < grad_logits.rows(); ++i)
    for (std::size_t cc = 0; cc < grad_logits.cols(); ++cc)
      grad_logits(i, cc) -= g_raw[i] * sm(i, cc);
  EncoderGrads grads = backward(c, params, cfg, &norm_id, grad_logits);

  std::vector<double> g_prop_o(expo.num_nodes, 0.0);
  const auto& mask = bench.ood_exposure->ood_mask;
  for (std::size_t k = 0; k < mask.size(); ++k) g_prop_o[mask[k]] = lambda * rl.grad_ood[k];
  const std::vector<double> g_raw_o = propagate_pullback(g_prop_o, expo.adjacency, alpha, K);
  const DenseMatrix sm_o = softmax_rows(ce.logits);
  DenseMatrix grad_logits_o(ce.logits.rows(), ce.logits.cols());
  for (std::size_t i = 0; i < grad_logits_o.rows(); ++i)
    for (std::size_t cc = 0; cc < grad_logits_o.cols(); ++cc)
      grad_logits_o(i, cc) = -g_raw_o[i] * sm_o(i, cc);
  accumulate(grads, backward(ce, params, cfg, &norm_ex, grad_logits_o));

  EXPECT_LT(finite_diff_check(objective, flatten(params), flatten(grads)), 1e-4);
}

TEST(Train, LambdaZeroMatchesPlainTrainingBitForBit) {
  const Benchmark bench = small_benchmark(7);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig plain;
  plain.epochs = 8;
  plain.seed = 4;
  TrainConfig reg = plain;
  reg.use_regularization = true;
  reg.lambda = 0.0;

  const TrainResult a = train(bench, cfg, plain);
  const TrainResult b = train(bench, cfg, reg);
  EXPECT_EQ(flatten(a.params), flatten(b.params));
  EXPECT_EQ(a.history.val_loss, b.history.val_loss);
  EXPECT_EQ(a.history.train_loss, b.history.train_loss);
  EXPECT_EQ(a.history.best_epoch, b.history.best_epoch);
  for (const double r : b.history.reg_loss) EXPECT_EQ(r, 0.0);
}

TEST(Train, InactiveHingesMatchPlainTrainingBitForBit) {
  // Thresholds chosen from the initial propagated energies so no hinge fires
  // in the single epoch: the regularized step must equal the plain step. The
  // exposure mask is narrowed to the highest-energy exposure node so that a
  // satisfying (t_in, t_out) pair exists.
  const EncoderConfig cfg = small_encoder(2);
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Benchmark bench = small_benchmark(seed);
    const Graph& id = *bench.id_graph;
    const Graph& expo = *bench.ood_exposure->graph;
    const SparseMatrix norm_id = sym_normalize(id.adjacency, true);
    const SparseMatrix norm_ex = sym_normalize(expo.adjacency, true);
    const EncoderParams p0 = init_params(cfg, id.num_features(), derive_seed(seed, "init"));
    const EnergyVector e_id = propagate_energy(
        node_energy(forward(p0, cfg, id.features, &norm_id).logits), id.adjacency, 0.5, 2);
    const EnergyVector e_ood = propagate_energy(
        node_energy(forward(p0, cfg, expo.features, &norm_ex).logits), expo.adjacency, 0.5, 2);
    std::size_t hot = 0;
    for (std::size_t i = 1; i < e_ood.values.size(); ++i)
      if (e_ood.values[i] > e_ood.values[hot]) hot = i;
    bench.ood_exposure->ood_mask = {hot};
    double max_train = -1e300;
    for (const std::size_t i : bench.splits.train) max_train = std::max(max_train, e_id.values[i]);
    const double min_expo = e_ood.values[hot];
    if (!(max_train < min_expo)) continue;  // this init cannot satisfy both bounds

    TrainConfig plain;
    plain.epochs = 1;
    plain.seed = seed;
    TrainConfig reg = plain;
    reg.use_regularization = true;
    reg.lambda = 1.0;
    reg.t_in = max_train;   // ReLU(e - t_in) = 0 everywhere, boundary included
    reg.t_out = min_expo;

    const TrainResult a = train(bench, cfg, plain);
    const TrainResult b = train(bench, cfg, reg);
    EXPECT_EQ(flatten(a.params), flatten(b.params));
    EXPECT_EQ(a.history.val_loss, b.history.val_loss);
    EXPECT_EQ(b.history.reg_loss[0], 0.0);
    return;
  }
  FAIL() << "no init seed produced disjoint initial energy ranges";
}

TEST(Train, LossDecreasesAcrossSeeds) {
  const EncoderConfig cfg = small_encoder(2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Benchmark bench = small_benchmark(20 + seed);
    TrainConfig tc;
    tc.epochs = 40;
    tc.seed = seed;
    const TrainResult r = train(bench, cfg, tc);
    EXPECT_LT(r.history.train_loss.back(), r.history.train_loss.front())
        << "seed " << seed;
  }
}

TEST(Train, EnergiesOfTrainedNodesDriftDownward) {
  // NLL training alone pushes in-distribution energies down.
  const EncoderConfig cfg = small_encoder(2);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Benchmark bench = small_benchmark(30 + seed);
    TrainConfig tc;
    tc.epochs = 60;
    tc.lr = 0.05;
    tc.seed = seed;
    const TrainResult r = train(bench, cfg, tc);
    EXPECT_LT(r.history.final_train_energy_mean, r.history.initial_train_energy_mean)
        << "seed " << seed;
  }
}

TEST(Train, DeterministicGivenSeedAndSensitiveToIt) {
  const Benchmark bench = small_benchmark(9);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig tc;
  tc.epochs = 6;
  tc.seed = 1;
  const TrainResult a = train(bench, cfg, tc);
  const TrainResult b = train(bench, cfg, tc);
  EXPECT_EQ(flatten(a.params), flatten(b.params));
  EXPECT_EQ(a.history.val_loss, b.history.val_loss);
  EXPECT_EQ(a.history.val_acc, b.history.val_acc);
  tc.seed = 2;
  const TrainResult c = train(bench, cfg, tc);
  EXPECT_NE(flatten(a.params), flatten(c.params));
}

TEST(Train, BestEpochTracksMinimumValLoss) {
  const Benchmark bench = small_benchmark(13);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig tc;
  tc.epochs = 25;
  const TrainResult r = train(bench, cfg, tc);
  const auto& v = r.history.val_loss;
  const std::size_t arg = static_cast<std::size_t>(
      std::min_element(v.begin(), v.end()) - v.begin());
  EXPECT_EQ(r.history.best_epoch, arg);
  EXPECT_DOUBLE_EQ(r.history.best_val_loss, v[arg]);
  ASSERT_EQ(v.size(), 25u);
}

TEST(Train, ValidatesItsInputs) {
  const Benchmark bench = small_benchmark(15);
  EncoderConfig cfg = small_encoder(3);  // wrong class count
  TrainConfig tc;
  tc.epochs = 1;
  EXPECT_THROW(train(bench, cfg, tc), std::invalid_argument);

  cfg = small_encoder(2);
  Benchmark no_expo = bench;
  no_expo.ood_exposure.reset();
  TrainConfig reg = tc;
  reg.use_regularization = true;
  EXPECT_THROW(train(no_expo, cfg, reg), std::invalid_argument);

  Benchmark empty_train = bench;
  empty_train.splits.train.clear();
  EXPECT_THROW(train(empty_train, cfg, tc), std::invalid_argument);
}

TEST(Train, DivergenceRaisesNumericErrorWithEpoch) {
  const Benchmark bench = small_benchmark(17);
  EncoderConfig cfg = small_encoder(2);
  cfg.use_feature_norm = false;  // normalization would tame the blow-up
  TrainConfig tc;
  tc.epochs = 5;
  tc.lr = 1e200;
  try {
    train(bench, cfg, tc);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_LE(e.epoch(), 5);
  }
}

TEST(GridSearch, SinglePointEqualsDirectTraining) {
  const Benchmark bench = small_benchmark(19);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig base;
  base.epochs = 5;
  base.use_regularization = true;
  GridSpec grids;
  grids.lrs = {0.02};
  grids.lambdas = {0.5};
  grids.t_ins = {-7.0};
  grids.t_outs = {-2.0};
  const GridResult gr = grid_search(bench, cfg, base, grids);
  ASSERT_EQ(gr.rows.size(), 1u);

  TrainConfig tc = base;
  tc.lr = 0.02;
  tc.lambda = 0.5;
  tc.t_in = -7.0;
  tc.t_out = -2.0;
  const TrainResult direct = train(bench, cfg, tc);
  EXPECT_EQ(flatten(gr.best_run.params), flatten(direct.params));
  EXPECT_DOUBLE_EQ(gr.rows[0].val_loss, direct.history.best_val_loss);
  EXPECT_EQ(gr.rows[0].best_epoch, direct.history.best_epoch + 1);
}

TEST(GridSearch, FullFactorialRowOrderAndWinner) {
  const Benchmark bench = small_benchmark(21);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig base;
  base.epochs = 4;
  base.use_regularization = true;
  GridSpec grids;
  grids.lrs = {0.05, 0.01};
  grids.lambdas = {1.0};
  grids.t_ins = {-7.0};
  grids.t_outs = {-2.0, -3.0};
  const GridResult gr = grid_search(bench, cfg, base, grids);
  ASSERT_EQ(gr.rows.size(), 4u);
  // lr-major nesting: lr, lambda, t_in, t_out.
  EXPECT_DOUBLE_EQ(gr.rows[0].lr, 0.05);
  EXPECT_DOUBLE_EQ(gr.rows[0].t_out, -2.0);
  EXPECT_DOUBLE_EQ(gr.rows[1].lr, 0.05);
  EXPECT_DOUBLE_EQ(gr.rows[1].t_out, -3.0);
  EXPECT_DOUBLE_EQ(gr.rows[2].lr, 0.01);

  std::size_t arg = 0;
  for (std::size_t i = 1; i < gr.rows.size(); ++i)
    if (gr.rows[i].val_loss < gr.rows[arg].val_loss) arg = i;
  EXPECT_EQ(gr.best_index, arg);
  EXPECT_DOUBLE_EQ(gr.best_config.lr, gr.rows[arg].lr);
  EXPECT_DOUBLE_EQ(gr.best_config.t_out, gr.rows[arg].t_out);
}

TEST(GridSearch, TieGoesToTheEarliestRowAndThreadsDontChangeResults) {
  const Benchmark bench = small_benchmark(23);
  const EncoderConfig cfg = small_encoder(2);
  TrainConfig base;
  base.epochs = 3;
  // Without regularization the lambda/threshold axes are inert, so both rows
  // run identically and the tie must resolve to index 0.
  GridSpec grids;
  grids.lrs = {0.03};
  grids.lambdas = {0.1, 1.0};
  grids.t_ins = {-7.0};
  grids.t_outs = {-2.0};
  const GridResult gr = grid_search(bench, cfg, base, grids);
  ASSERT_EQ(gr.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(gr.rows[0].val_loss, gr.rows[1].val_loss);
  EXPECT_EQ(gr.best_index, 0u);

  const GridResult par = grid_search(bench, cfg, base, grids, 4);
  EXPECT_EQ(par.best_index, gr.best_index);
  for (std::size_t i = 0; i < gr.rows.size(); ++i) {
    EXPECT_EQ(par.rows[i].val_loss, gr.rows[i].val_loss);
    EXPECT_EQ(par.rows[i].best_epoch, gr.rows[i].best_epoch);
  }
  EXPECT_EQ(flatten(par.best_run.params), flatten(gr.best_run.params));
}

TEST(Writers, TrainLogAndGridCsvFormats) {
  TrainHistory h;
  h.train_loss = {1.5, 1.25};
  h.val_loss = {1.4, 1.3};
  h.val_acc = {0.5, 0.75};
  const auto dir = std::filesystem::path(::testing::TempDir());
  const auto log_path = dir / "gnnsafe_train_log.jsonl";
  write_train_log(h, log_path);
  std::ifstream in(log_path);
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::ordered_json::parse(line);
    ++count;
    EXPECT_EQ(j["epoch"], count);
    EXPECT_TRUE(j.contains("train_loss"));
    EXPECT_TRUE(j.contains("val_loss"));
    EXPECT_TRUE(j.contains("val_acc"));
  }
  EXPECT_EQ(count, 2u);

  const auto csv_path = dir / "gnnsafe_grid.csv";
  write_grid_csv({{0.1, 1.0, -7.0, -2.0, 3, 0.5, 0.9}}, csv_path);
  std::ifstream csv(csv_path);
  std::string header, row;
  std::getline(csv, header);
  EXPECT_EQ(header, "lr,lambda,t_in,t_out,best_epoch,val_loss,val_acc");
  std::getline(csv, row);
  // %.17g columns: every double round-trips, exact values print short.
  char want[128];
  std::snprintf(want, sizeof(want), "%.17g,%.17g,%.17g,%.17g,3,%.17g,%.17g", 0.1, 1.0, -7.0,
                -2.0, 0.5, 0.9);
  EXPECT_EQ(row, want);
  EXPECT_EQ(std::strtod(row.c_str(), nullptr), 0.1);
}
