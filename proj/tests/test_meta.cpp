#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fewgraph/meta.hpp"
#include "fewgraph/selfpaced.hpp"
#include "fewgraph/rng.hpp"
#include "fewgraph/vocab.hpp"
#include "helpers.hpp"

using namespace fewgraph;

namespace {

struct Toy {
    Vocabulary v;
    std::vector<DfsCode> codes;
    ModelParams theta;
};

Toy make_toy(std::uint64_t seed) {
    Toy t;
    GraphDataset d = parse_dataset("t # 0\nv 0 A\nv 1 B\nv 2 A\ne 0 1 x\ne 1 2 y\ne 0 2 x");
    t.v = build_vocabulary(std::span(&d, 1));
    t.codes = {DfsCode{EdgeTuple{0, 1, 0, 0, 1}},
               DfsCode{EdgeTuple{0, 1, 0, 1, 1}, EdgeTuple{1, 2, 1, 0, 0}},
               DfsCode{EdgeTuple{0, 1, 1, 1, 0}, EdgeTuple{1, 2, 0, 0, 0}, EdgeTuple{2, 0, 0, 1, 1}}};
    t.theta = ModelParams::init_random(t.v, ModelDims{3, 2, 3}, seed);
    return t;
}

} // namespace

TEST_CASE("documented meta defaults") {
    MetaConfig mc;
    CHECK(mc.k == 15);
    CHECK(mc.epsilon == 0.8);
    SelfPacedConfig sp;
    CHECK(sp.gamma == 1.001);
}

TEST_CASE("reptile interpolation identities") {
    Toy t = make_toy(1);
    ModelParams adapted = ModelParams::init_random(t.v, ModelDims{3, 2, 3}, 2);

    ModelParams a = t.theta;
    reptile_update(a, adapted, 0.0);
    CHECK(params_equal(a, t.theta));

    ModelParams b = t.theta;
    reptile_update(b, adapted, 1.0);
    CHECK(params_equal(b, adapted));

    // midpoint arithmetic on three chosen coordinates at the default step size
    ModelParams c = t.theta;
    fill_zero(c);
    ModelParams target = c;
    target.emb_b.v[0] = 1.0;
    target.emb_b.v[1] = 2.0;
    target.emb_b.v[2] = -1.0;
    reptile_update(c, target, 0.8);
    CHECK(c.emb_b.v[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(c.emb_b.v[1] == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(c.emb_b.v[2] == doctest::Approx(-0.8).epsilon(1e-15));

    // norm contraction is exactly linear
    ModelParams e = t.theta;
    reptile_update(e, adapted, 0.25);
    auto es = tensor_list(e);
    auto ts = tensor_list(t.theta);
    auto as = tensor_list(adapted);
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = 0; j < es[i]->size(); ++j)
            CHECK(es[i]->v[j] - ts[i]->v[j] ==
                  doctest::Approx(0.25 * (as[i]->v[j] - ts[i]->v[j])).epsilon(1e-12));
}

TEST_CASE("inner loop leaves its input untouched") {
    Toy t = make_toy(3);
    ModelParams snapshot = t.theta;
    inner_loop(t.theta, t.codes, 3, 0.01, 2, 77, t.v);
    CHECK(params_equal(snapshot, t.theta));
}

TEST_CASE("K=1 inner loop is one plain gradient step") {
    Toy t = make_toy(4);
    const double alpha = 0.05;
    const std::uint64_t seed = 99;
    ModelParams adapted = inner_loop(t.theta, t.codes, 1, alpha, 2, seed, t.v);

    // replicate by hand with the public batch schedule
    auto idx = sample_batch_indices(seed, 0, 2, static_cast<int>(t.codes.size()));
    std::vector<const DfsCode*> batch;
    for (int i : idx) batch.push_back(&t.codes[static_cast<std::size_t>(i)]);
    ModelParams grad = t.theta;
    batch_gradient(t.theta, batch, t.v, RunMode::eval, 0.0, 0, 1, grad);   // eval: no masks drawn
    scale(1.0 / 2.0, grad);
    ModelParams manual = t.theta;
    axpy(-alpha, grad, manual);
    CHECK(max_abs_difference(adapted, manual) == 0.0);

    // the composite reptile step then equals theta - eps*alpha*grad
    ModelParams composite = t.theta;
    reptile_update(composite, adapted, 0.8);
    ModelParams direct = t.theta;
    axpy(-0.8 * alpha, grad, direct);
    CHECK(max_abs_difference(composite, direct) < 1e-15);
}

TEST_CASE("K=2 inner loop equals two hand-applied steps") {
    Toy t = make_toy(5);
    const double alpha = 0.02;
    const std::uint64_t seed = 123;
    ModelParams adapted = inner_loop(t.theta, t.codes, 2, alpha, 2, seed, t.v);

    ModelParams p = t.theta;
    for (int step = 0; step < 2; ++step) {
        auto idx = sample_batch_indices(seed, step, 2, static_cast<int>(t.codes.size()));
        std::vector<const DfsCode*> batch;
        for (int i : idx) batch.push_back(&t.codes[static_cast<std::size_t>(i)]);
        ModelParams grad = p;
        batch_gradient(p, batch, t.v, RunMode::eval, 0.0, 0, 1, grad);
        scale(1.0 / 2.0, grad);
        axpy(-alpha, grad, p);
    }
    CHECK(max_abs_difference(adapted, p) == 0.0);
}

TEST_CASE("meta budget zero returns the initialization") {
    Toy t = make_toy(6);
    MetaConfig mc;
    mc.budget = 0;
    mc.seed = 5;
    std::vector<CodeSet> sets{{"toy", t.codes, t.codes}};
    ModelParams out = meta_train(t.theta, sets, mc, t.v);
    CHECK(params_equal(out, t.theta));
}

TEST_CASE("single dataset with eps=1 collapses to chained inner loops") {
    Toy t = make_toy(7);
    MetaConfig mc;
    mc.k = 2;
    mc.epsilon = 1.0;
    mc.inner_lr = 0.01;
    mc.inner_batch = 2;
    mc.dropout = 0.0;
    mc.budget = 3;
    mc.val_every = 0;   // no validation interruptions
    mc.seed = 11;
    std::vector<CodeSet> sets{{"toy", t.codes, {}}};
    ModelParams meta = meta_train(t.theta, sets, mc, t.v);

    ModelParams chained = t.theta;
    for (int iter = 1; iter <= 3; ++iter)
        chained = inner_loop(chained, t.codes, mc.k, mc.inner_lr, mc.inner_batch,
                             mix_seed(mc.seed, static_cast<std::uint64_t>(iter)), t.v, 0.0);
    CHECK(max_abs_difference(meta, chained) == 0.0);
}

TEST_CASE("meta log format") {
    Toy t = make_toy(8);
    MetaConfig mc;
    mc.k = 1;
    mc.budget = 4;
    mc.val_every = 2;
    mc.inner_batch = 2;
    mc.dropout = 0.0;
    mc.seed = 13;
    std::vector<CodeSet> sets{{"toy", t.codes, t.codes}};
    std::vector<MetaLogEntry> log;
    meta_train(t.theta, sets, mc, t.v, &log);
    REQUIRE(log.size() == 4);
    CHECK(log[1].validated);
    CHECK_FALSE(log[0].validated);
    std::string text = format_meta_log(log);
    CHECK(text.find("toy") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);   // header + 4 rows
}

TEST_CASE("meta-training on related spring systems beats a random initialization") {
    // auxiliary: 4- and 6-particle systems; held-out target: 5-particle codes
    GraphDataset aux4 = synth_spring(4, 60, 5, 0.5, 101);
    GraphDataset aux6 = synth_spring(6, 60, 5, 0.5, 102);
    GraphDataset tgt5 = synth_spring(5, 40, 5, 0.5, 103);
    std::vector<GraphDataset> all{aux4, aux6, tgt5};
    Vocabulary v = build_vocabulary(all);

    auto codes_of = [&](const GraphDataset& d) { return canonize_dataset(remap_dataset(d, v)); };
    auto c4 = codes_of(aux4);
    auto c6 = codes_of(aux6);
    auto c5 = codes_of(tgt5);
    std::vector<CodeSet> sets{
        {"spring4", {c4.begin(), c4.begin() + 30}, {c4.begin() + 30, c4.end()}},
        {"spring6", {c6.begin(), c6.begin() + 30}, {c6.begin() + 30, c6.end()}}};

    MetaConfig mc;
    mc.k = 3;
    mc.epsilon = 0.8;
    mc.inner_lr = 0.01;
    mc.inner_batch = 8;
    mc.dropout = 0.0;
    mc.budget = 200;
    mc.val_every = 20;
    mc.patience = 10;
    mc.seed = 17;
    ModelParams theta0 = ModelParams::init_random(v, ModelDims{16, 24, 24}, 17);
    ModelParams theta = meta_train(theta0, sets, mc, v);

    const double random_loss = mean_sequence_loss(theta0, c5, v, 1);
    const double meta_loss = mean_sequence_loss(theta, c5, v, 1);
    MESSAGE("random init loss ", random_loss, " meta loss ", meta_loss);
    CHECK(meta_loss < random_loss);
}
