// SPDX-License-Identifier: Apache-2.0
#include "autoodd/acquisition.hpp"
#include "autoodd/errors.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace autoodd;
using namespace autoodd::testing;

namespace {

struct Fixture {
    DescriptorSpace space = digit_color_space();
    std::vector<AxisEmbedder> embedders = build_embedders(space);
    std::vector<GpAxisModel> models{GpAxisModel{}, GpAxisModel{}};
    OperationalWeights weights;
};

} // namespace

TEST_CASE("should_override respects the epsilon bounds") {
    SUBCASE("epsilon 0 never fires") {
        OverridePolicy policy{0.0, AcquisitionMode::MaxUncertainty, RngStream(1)};
        for (int i = 0; i < 1000; ++i) {
            CHECK_FALSE(should_override(policy));
        }
    }
    SUBCASE("epsilon 1 always fires") {
        OverridePolicy policy{1.0, AcquisitionMode::MaxUncertainty, RngStream(1)};
        for (int i = 0; i < 1000; ++i) {
            CHECK(should_override(policy));
        }
    }
    SUBCASE("epsilon 0.1 fires a tenth of the time") {
        OverridePolicy policy{0.1, AcquisitionMode::MaxUncertainty, RngStream(99)};
        const int draws = 100000;
        int fired = 0;
        for (int i = 0; i < draws; ++i) {
            fired += should_override(policy) ? 1 : 0;
        }
        const double fraction = static_cast<double>(fired) / draws;
        CHECK(std::fabs(fraction - 0.1) < 0.01); // 3-sigma binomial bound is ~0.003
    }
    SUBCASE("out-of-range epsilon is rejected") {
        OverridePolicy policy{1.5, AcquisitionMode::MaxUncertainty, RngStream(1)};
        CHECK_THROWS_AS(should_override(policy), ValidationError);
    }
}

TEST_CASE("select_override with unfitted models breaks ties at the lowest index") {
    Fixture f;
    QueriedSet queried(f.space.total_count());
    RngStream choice(0);
    const auto s = select_override(AcquisitionMode::MaxUncertainty, f.space, f.embedders, f.models,
                                   queried, f.weights, choice);
    REQUIRE(s.has_value());
    CHECK(s->index == 0);
}

TEST_CASE("the last unqueried scenario is forced under every mode") {
    Fixture f;
    QueriedSet queried(f.space.total_count());
    for (std::uint64_t i = 0; i < f.space.total_count(); ++i) {
        if (i != 42) {
            queried.insert(i);
        }
    }
    for (const auto mode :
         {AcquisitionMode::MaxFailure, AcquisitionMode::MaxUncertainty, AcquisitionMode::RandomUnqueried}) {
        RngStream choice(7);
        const auto s = select_override(mode, f.space, f.embedders, f.models, queried, f.weights, choice);
        REQUIRE(s.has_value());
        CHECK(s->index == 42);
    }
}

TEST_CASE("an exhausted grid signals exhaustion") {
    Fixture f;
    QueriedSet queried(f.space.total_count());
    for (std::uint64_t i = 0; i < f.space.total_count(); ++i) {
        queried.insert(i);
    }
    RngStream choice(7);
    CHECK_FALSE(select_override(AcquisitionMode::MaxUncertainty, f.space, f.embedders, f.models, queried,
                                f.weights, choice)
                    .has_value());
}

TEST_CASE("select_override never returns a queried scenario") {
    Fixture f;
    RngStream scatter(123);
    for (const auto mode :
         {AcquisitionMode::MaxFailure, AcquisitionMode::MaxUncertainty, AcquisitionMode::RandomUnqueried}) {
        QueriedSet queried(f.space.total_count());
        RngStream choice(5);
        for (int step = 0; step < 60; ++step) {
            queried.insert(scatter.next_below(f.space.total_count()));
            const auto s = select_override(mode, f.space, f.embedders, f.models, queried, f.weights, choice);
            REQUIRE(s.has_value());
            CHECK_FALSE(queried.contains(s->index));
        }
    }
}

TEST_CASE("selection is deterministic given the same state and seed") {
    Fixture f;
    QueriedSet queried(f.space.total_count());
    queried.insert(3);
    queried.insert(97);
    for (const auto mode :
         {AcquisitionMode::MaxFailure, AcquisitionMode::MaxUncertainty, AcquisitionMode::RandomUnqueried}) {
        RngStream a(31);
        RngStream b(31);
        const auto s1 = select_override(mode, f.space, f.embedders, f.models, queried, f.weights, a);
        const auto s2 = select_override(mode, f.space, f.embedders, f.models, queried, f.weights, b);
        REQUIRE(s1.has_value());
        REQUIRE(s2.has_value());
        CHECK(s1->index == s2->index);
    }
}

TEST_CASE("MaxFailure exploits observed failures along an axis") {
    Fixture f;
    // every digit observed in three colors; only digit 7 fails, in all three
    QueriedSet queried(f.space.total_count());
    std::vector<std::vector<std::vector<double>>> inputs(2);
    std::vector<double> outcomes;
    for (const std::string& color : {"blue", "red", "green"}) {
        for (int digit = 0; digit <= 9; ++digit) {
            const std::vector<std::string> args = {std::to_string(digit), color};
            const Scenario s = parse_keywords(f.space, args);
            queried.insert(s.index);
            const auto e = embed_scenario(f.space, f.embedders, s);
            inputs[0].push_back(e.axes[0]);
            inputs[1].push_back(e.axes[1]);
            outcomes.push_back(digit == 7 ? 1.0 : 0.0);
        }
    }
    for (std::size_t k = 0; k < 2; ++k) {
        f.models[k] = GpAxisModel::fit(k, inputs[k], outcomes, GpHyperparams{});
    }
    RngStream choice(0);
    const auto s = select_override(AcquisitionMode::MaxFailure, f.space, f.embedders, f.models, queried,
                                   f.weights, choice);
    REQUIRE(s.has_value());
    CHECK(keyword_of(f.space, *s, 0) == "7");
    CHECK_FALSE(queried.contains(s->index));
}

TEST_CASE("scorer agrees with direct posterior aggregation") {
    Fixture f;
    const Scenario s = scenario_from_index(f.space, 55);
    const auto e = embed_scenario(f.space, f.embedders, s);
    f.models[0] = GpAxisModel::fit(0, {e.axes[0]}, {1.0}, GpHyperparams{});

    const ScenarioScorer scorer(f.space, f.embedders, f.models);
    const auto [failure, uncertainty] = scorer.scores(s, 1.0);

    std::vector<Posterior> direct;
    direct.push_back(f.models[0].posterior(e.axes[0]));
    direct.push_back(f.models[1].posterior(e.axes[1]));
    const auto [ef, eu] = aggregate(direct, 1.0);
    CHECK(failure == doctest::Approx(ef));
    CHECK(uncertainty == doctest::Approx(eu));
}

TEST_CASE("operational weights steer MaxFailure") {
    Fixture f;
    QueriedSet queried(f.space.total_count());
    RngStream choice(0);

    SUBCASE("a zero-weight scenario loses an otherwise-even tie") {
        // unfitted models score every scenario 0.5 * p
        const OperationalWeights weights = OperationalWeights::from_json(
            R"([{"scenario": {"digit": "0", "color": "blue"}, "weight": 0.0}])", f.space);
        const auto s = select_override(AcquisitionMode::MaxFailure, f.space, f.embedders, f.models,
                                       queried, weights, choice);
        REQUIRE(s.has_value());
        CHECK(s->index == 1); // index 0 scored 0, the tie moves to the next index
    }
    SUBCASE("an up-weighted scenario wins the argmax") {
        const OperationalWeights weights = OperationalWeights::from_json(
            R"([{"scenario": {"digit": "0", "color": "brown"}, "weight": 1.9}])", f.space);
        const auto s = select_override(AcquisitionMode::MaxFailure, f.space, f.embedders, f.models,
                                       queried, weights, choice);
        REQUIRE(s.has_value());
        CHECK(keyword_of(f.space, *s, 0) == "0");
        CHECK(keyword_of(f.space, *s, 1) == "brown");
    }
}

TEST_CASE("weight tables validate their entries") {
    const DescriptorSpace space = digit_color_space();
    CHECK_THROWS_AS(OperationalWeights::from_json("{\"not\": \"array\"}", space), ConfigError);
    CHECK_THROWS_AS(OperationalWeights::from_json(
                        R"([{"scenario": {"digit": "7"}, "weight": 1.0}])", space),
                    ConfigError); // missing color
    CHECK_THROWS_AS(OperationalWeights::from_json(
                        R"([{"scenario": {"digit": "7", "color": "cyan"}, "weight": -1.0}])", space),
                    ConfigError);
}
