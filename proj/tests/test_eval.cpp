#include <doctest.h>

#include <cmath>
#include <random>

#include "hnrad/eval.hpp"

#include "helpers.hpp"

using namespace hnrad;
using hnrad_tests::geometry;

namespace {

LabelMask mask_with(Index3 dims, const std::vector<std::pair<Index3, uint8_t>>& voxels) {
    LabelMask m = make_mask(geometry(dims));
    for (const auto& [v, l] : voxels) m.at(v[0], v[1], v[2]) = l;
    return m;
}

// Fill the first `n` voxels (storage order) with `label`.
LabelMask mask_first_n(Index3 dims, int64_t n, uint8_t label, int64_t offset = 0) {
    LabelMask m = make_mask(geometry(dims));
    for (int64_t i = offset; i < offset + n; ++i) m.labels[size_t(i)] = label;
    return m;
}

SoftSegmentation random_soft(std::mt19937_64& rng, int n_voxels, int k = 3) {
    SoftSegmentation s;
    s.n_classes = k;
    s.truth.resize(size_t(n_voxels));
    s.probabilities.resize(size_t(n_voxels) * size_t(k));
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int v = 0; v < n_voxels; ++v) {
        s.truth[size_t(v)] = int(rng() % uint64_t(k));
        double sum = 0;
        for (int c = 0; c < k; ++c) {
            const double p = u(rng);
            s.probabilities[size_t(v) * size_t(k) + size_t(c)] = p;
            sum += p;
        }
        for (int c = 0; c < k; ++c) s.probabilities[size_t(v) * size_t(k) + size_t(c)] /= sum;
    }
    return s;
}

SoftSegmentation one_hot(const std::vector<int>& truth, int k = 3) {
    SoftSegmentation s;
    s.n_classes = k;
    s.truth = truth;
    s.probabilities.assign(truth.size() * size_t(k), 0.0);
    for (size_t v = 0; v < truth.size(); ++v)
        s.probabilities[v * size_t(k) + size_t(truth[v])] = 1.0;
    return s;
}

} // namespace

TEST_CASE("dice: basic identities") {
    const Index3 dims{6, 6, 6};

    SUBCASE("identical masks give 1") {
        const LabelMask a = mask_with(dims, {{{1, 1, 1}, 1}, {{2, 2, 2}, 1}});
        CHECK(dice(a, a, 1) == doctest::Approx(1.0));
    }

    SUBCASE("disjoint masks give 0") {
        const LabelMask a = mask_with(dims, {{{1, 1, 1}, 1}});
        const LabelMask b = mask_with(dims, {{{3, 3, 3}, 1}});
        CHECK(dice(a, b, 1) == doctest::Approx(0.0));
    }

    SUBCASE("|P|=|T|=4 with overlap 2 gives 0.5") {
        LabelMask p = make_mask(geometry(dims));
        LabelMask t = make_mask(geometry(dims));
        for (int i = 0; i < 4; ++i) p.labels[size_t(i)] = 1;
        for (int i = 2; i < 6; ++i) t.labels[size_t(i)] = 1;
        CHECK(dice(p, t, 1) == doctest::Approx(0.5));
    }

    SUBCASE("both empty is 1, one empty is 0") {
        const LabelMask e = make_mask(geometry(dims));
        const LabelMask a = mask_with(dims, {{{1, 1, 1}, 1}});
        CHECK(dice(e, e, 1) == doctest::Approx(1.0));
        CHECK(dice(a, e, 1) == doctest::Approx(0.0));
        CHECK(dice(e, a, 1) == doctest::Approx(0.0));
    }

    SUBCASE("symmetric in its arguments") {
        std::mt19937_64 rng(3);
        LabelMask p = make_mask(geometry(dims));
        LabelMask t = make_mask(geometry(dims));
        for (auto& l : p.labels) l = uint8_t(rng() % 3);
        for (auto& l : t.labels) l = uint8_t(rng() % 3);
        CHECK(dice(p, t, 1) == dice(t, p, 1));
        CHECK(dice(p, t, 2) == dice(t, p, 2));
    }

    SUBCASE("geometry mismatch is an error") {
        const LabelMask a = make_mask(geometry(dims));
        const LabelMask b = make_mask(geometry({5, 6, 6}));
        CHECK_THROWS_AS(dice(a, b, 1), geometry_error);
    }
}

TEST_CASE("dice matches direct set counting on random pairs") {
    std::mt19937_64 rng(9);
    for (int round = 0; round < 20; ++round) {
        const Index3 dims{5, 5, 5};
        LabelMask p = make_mask(geometry(dims));
        LabelMask t = make_mask(geometry(dims));
        for (auto& l : p.labels) l = uint8_t(rng() % 3);
        for (auto& l : t.labels) l = uint8_t(rng() % 3);
        for (int label = 1; label <= 2; ++label) {
            int64_t np = 0, nt = 0, both = 0;
            for (size_t i = 0; i < p.labels.size(); ++i) {
                np += p.labels[i] == label;
                nt += t.labels[i] == label;
                both += p.labels[i] == label && t.labels[i] == label;
            }
            const double expected = np + nt == 0 ? 1.0 : 2.0 * double(both) / double(np + nt);
            CHECK(dice(p, t, label) == doctest::Approx(expected));
        }
    }
}

TEST_CASE("aggregated dice") {
    const Index3 dims{10, 10, 10};

    SUBCASE("single case reduces to dice") {
        LabelMask p = mask_first_n(dims, 6, 1);
        LabelMask t = mask_first_n(dims, 6, 1, 3);
        const DiceReport r = aggregated_dice({{&p, &t}});
        CHECK(r.aggregated(1) == doctest::Approx(dice(p, t, 1)));
    }

    SUBCASE("empty-vs-empty contributes nothing") {
        LabelMask p1 = mask_first_n(dims, 4, 1);
        LabelMask t1 = mask_first_n(dims, 4, 1);
        LabelMask e1 = make_mask(geometry(dims));
        LabelMask e2 = make_mask(geometry(dims));
        const DiceReport with_empty = aggregated_dice({{&p1, &t1}, {&e1, &e2}});
        const DiceReport without = aggregated_dice({{&p1, &t1}});
        CHECK(with_empty.aggregated(1) == doctest::Approx(without.aggregated(1)));
        // Per-case convention still scores the empty case 1.0.
        CHECK(with_empty.cases[1].dice_gtvp() == doctest::Approx(1.0));
    }

    SUBCASE("aggregation is not averaging: sizes 2 vs 200") {
        // Case A: |P|=|T|=2, perfect overlap (dice 1). Case B: |P|=|T|=200,
        // disjoint (dice 0). Mean is 0.5; the aggregated score is 4/404.
        LabelMask pa = mask_first_n(dims, 2, 1);
        LabelMask ta = mask_first_n(dims, 2, 1);
        LabelMask pb = mask_first_n(dims, 200, 1);
        LabelMask tb = mask_first_n(dims, 200, 1, 300);
        const DiceReport r = aggregated_dice({{&pa, &ta}, {&pb, &tb}});
        CHECK(r.aggregated(1) == doctest::Approx(4.0 / 404.0));
        CHECK(r.mean_per_case(1) == doctest::Approx(0.5));
        CHECK(r.aggregated(1) < 0.011); // nowhere near the per-case mean
    }

    SUBCASE("exactly 0.02 vs 0.5 with sizes 2 and 98") {
        LabelMask pa = mask_first_n(dims, 2, 1);
        LabelMask ta = mask_first_n(dims, 2, 1);
        LabelMask pb = mask_first_n(dims, 98, 1);
        LabelMask tb = mask_first_n(dims, 98, 1, 200);
        const DiceReport r = aggregated_dice({{&pa, &ta}, {&pb, &tb}});
        CHECK(r.aggregated(1) == doctest::Approx(0.02).epsilon(1e-12));
        CHECK(r.mean_per_case(1) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("soft dice loss") {
    SUBCASE("perfect one-hot with all three classes present gives -0.5") {
        const SoftSegmentation s = one_hot({0, 0, 1, 1, 2, 2, 0, 1, 2});
        CHECK(soft_dice_loss(s) == doctest::Approx(-0.5).epsilon(1e-9));
    }

    SUBCASE("perfect one-hot with two of three classes present gives -1/3") {
        const SoftSegmentation s = one_hot({0, 0, 1, 1});
        std::vector<std::string> flags;
        CHECK(soft_dice_loss(s, &flags) == doctest::Approx(-0.5 * 2.0 / 3.0));
        CHECK(flags.size() == 1); // class 2 empty
    }

    SUBCASE("uniform prediction matches the direct-summation oracle") {
        std::mt19937_64 rng(5);
        SoftSegmentation s = random_soft(rng, 60);
        for (auto& p : s.probabilities) p = 1.0 / 3.0;

        double expected = 0;
        for (int k = 0; k < 3; ++k) {
            double num = 0, den = 0;
            for (size_t v = 0; v < s.truth.size(); ++v) {
                num += s.truth[v] == k ? 1.0 / 3.0 : 0.0;
                den += 1.0 / 3.0 + (s.truth[v] == k ? 1.0 : 0.0);
            }
            if (den > 0) expected += num / den;
        }
        expected = -expected / 3.0;
        CHECK(soft_dice_loss(s) == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("always within [-1, 0]") {
        std::mt19937_64 rng(11);
        for (int round = 0; round < 10; ++round) {
            const SoftSegmentation s = random_soft(rng, 40);
            const double l = soft_dice_loss(s);
            CHECK(l <= 0.0);
            CHECK(l >= -1.0);
        }
    }

    SUBCASE("decreases as u moves toward the truth along a convex path") {
        std::mt19937_64 rng(13);
        const SoftSegmentation start = random_soft(rng, 30);
        const SoftSegmentation target = one_hot(start.truth);
        double prev = soft_dice_loss(start);
        for (double t = 0.25; t <= 1.0; t += 0.25) {
            SoftSegmentation mix = start;
            for (size_t i = 0; i < mix.probabilities.size(); ++i)
                mix.probabilities[i] =
                    (1 - t) * start.probabilities[i] + t * target.probabilities[i];
            const double l = soft_dice_loss(mix);
            CHECK(l <= prev + 1e-12);
            prev = l;
        }
    }
}

TEST_CASE("cross entropy and total loss") {
    SUBCASE("uniform prediction over 3 classes gives ln 3") {
        SoftSegmentation s = one_hot({0, 1, 2, 0});
        for (auto& p : s.probabilities) p = 1.0 / 3.0;
        CHECK(cross_entropy(s) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    }

    SUBCASE("perfect prediction: CE ~ 0, total ~ soft dice") {
        const SoftSegmentation s = one_hot({0, 1, 2, 1, 0, 2});
        CHECK(cross_entropy(s) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(total_loss(s) == doctest::Approx(soft_dice_loss(s)).epsilon(1e-9));
    }

    SUBCASE("zero probability at a truth voxel is clamped and flagged") {
        SoftSegmentation s = one_hot({0, 1});
        // Make voxel 0 assign zero mass to its truth class.
        s.probabilities[0] = 0.0;
        s.probabilities[1] = 1.0;
        std::vector<std::string> flags;
        const double ce = cross_entropy(s, &flags);
        CHECK(ce == doctest::Approx(-std::log(1e-12) / 2.0));
        CHECK(!flags.empty());
    }

    SUBCASE("random case matches an independent summation oracle") {
        std::mt19937_64 rng(17);
        const SoftSegmentation s = random_soft(rng, 50);
        long double acc = 0;
        for (size_t v = 0; v < s.truth.size(); ++v)
            acc -= std::log((long double)s.probabilities[v * 3 + size_t(s.truth[v])]);
        const double expected = double(acc / (long double)(s.truth.size()));
        CHECK(std::abs(cross_entropy(s) - expected) < 1e-10);
        CHECK(std::abs(total_loss(s) - (soft_dice_loss(s) + expected)) < 1e-10);
    }

    SUBCASE("invalid probabilities are rejected") {
        SoftSegmentation s = one_hot({0, 1});
        s.probabilities[0] = 0.7; // sums to 1.7 now
        CHECK_THROWS_AS(cross_entropy(s), error);
    }
}
