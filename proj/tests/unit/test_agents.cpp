#include "bomuse/agents.hpp"
#include "bomuse/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace bomuse;

namespace {

std::vector<Observation> matyas_init(const ObjectiveSpec& o, std::uint64_t seed, int n) {
    Rng rng(seed, 1, 0);
    std::vector<Observation> data;
    for (int i = 0; i < n; ++i) {
        const Vector x = rng.uniform_in(o.bounds);
        data.push_back(Observation{x, o.eval(x), Source::Init, 0, o.eval(x)});
    }
    return data;
}

}  // namespace

TEST_SUITE("agents") {
    TEST_CASE("names round trip") {
        for (auto p : {Policy::BoMuseAi, Policy::GenericUcb, Policy::SimulatedExpertUcb, Policy::SimulatedExpertEi,
                       Policy::PureExplorer, Policy::LiveHuman}) {
            CHECK(policy_from_string(to_string(p)) == p);
        }
        CHECK(agent_role_from_string("human") == AgentRole::Human);
        CHECK_THROWS_AS(policy_from_string("oracle"), InputError);
    }

    TEST_CASE("agent definitions validate and serialize") {
        AgentSpec bad = live_human();
        bad.role = AgentRole::Ai;
        CHECK_THROWS_AS(bad.validate(), InputError);
        AgentSpec neg = bo_muse_ai();
        neg.noise_variance = 0.0;
        CHECK_THROWS_AS(neg.validate(), InputError);

        const AgentSpec expert = simulated_expert(builtin_feature_map("levy-6d"));
        const nlohmann::json j = expert;
        const AgentSpec back = j.get<AgentSpec>();
        CHECK(back.policy == Policy::SimulatedExpertUcb);
        CHECK(back.beta_hat == expert.beta_hat);
        CHECK(back.kernel == expert.kernel);
        CHECK(std::sqrt(expert.beta_hat) == doctest::Approx(0.001));
    }

    TEST_CASE("agent model standardizes oriented targets") {
        const ObjectiveSpec o = builtin("matyas-2d");
        const auto data = matyas_init(o, 3, 6);
        const AgentModel m = fit_agent_model(bo_muse_ai(), data, Sense::Minimize, o.bounds);
        CHECK(std::abs(m.gp.targets().mean()) <= 1e-12);
        CHECK(std::sqrt(m.gp.targets().squaredNorm() / 6.0) == doctest::Approx(1.0));
        // Best target corresponds to the smallest Matyas value.
        double best_f = data[0].y;
        for (const auto& d : data) best_f = std::min(best_f, d.y);
        CHECK(m.best_target == doctest::Approx((-best_f - m.offset) / m.scale));
    }

    TEST_CASE("expert on empty data returns an in-bounds point") {
        const ObjectiveSpec o = builtin("matyas-2d");
        SuggestContext ctx{o.bounds, o.sense, 5, std::nullopt, {}};
        const auto x = suggest(simulated_expert(o.feature_map), {}, BetaSchedule{}, ctx);
        REQUIRE(x);
        CHECK(o.bounds.contains(*x));
    }

    TEST_CASE("pure explorer moves away from a lone centre observation") {
        const ObjectiveSpec o = builtin("matyas-2d");
        const Vector c = o.bounds.center();
        const std::vector<Observation> data{Observation{c, 0.0, Source::Init, 0, 0.0}};
        const AgentSpec pe = pure_explorer_ai();
        SuggestContext ctx{o.bounds, o.sense, 9, std::nullopt, {}};
        const auto x = suggest(pe, data, BetaSchedule{}, ctx);
        REQUIRE(x);
        const AgentModel m = fit_agent_model(pe, data, o.sense, o.bounds);
        CHECK(m.gp.stddev(*x) >= m.gp.stddev(c));
        CHECK((*x - c).norm() > 0.0);
    }

    TEST_CASE("BO-Muse AI suggestion dominates random probes on Matyas") {
        const ObjectiveSpec o = builtin("matyas-2d");
        const auto data = matyas_init(o, 0, 3);
        const AgentSpec ai = bo_muse_ai();
        const AgentModel m = fit_agent_model(ai, data, o.sense, o.bounds);
        BetaSchedule sched;
        sched.running_gamma = 2.0;
        const AcquisitionSpec acq = acquisition_for(ai, sched, m);
        SuggestContext ctx{o.bounds, o.sense, 0, std::nullopt, {}};
        const auto x = suggest_with_model(ai, m, sched, ctx);
        REQUIRE(x);
        CHECK(o.bounds.contains(*x));
        const double v = acquisition_value(acq, m.gp, *x);
        Rng rng(1234);
        int beaten = 0;
        for (int i = 0; i < 1000; ++i) {
            if (acquisition_value(acq, m.gp, rng.uniform_in(o.bounds)) > v + 1e-9) ++beaten;
        }
        CHECK(beaten == 0);
    }

    TEST_CASE("exploration weights order the policies") {
        const ObjectiveSpec o = builtin("matyas-2d");
        const auto data = matyas_init(o, 2, 4);
        BetaSchedule sched;
        sched.iteration = 3;
        const AgentModel m = fit_agent_model(bo_muse_ai(), data, o.sense, o.bounds);
        const double muse = std::get<GpUcb>(acquisition_for(bo_muse_ai(), sched, m)).beta;
        const double generic = std::get<GpUcb>(acquisition_for(generic_ucb_ai(), sched, m)).beta;
        const double expert = std::get<GpUcb>(acquisition_for(simulated_expert(o.feature_map), sched, m)).beta;
        CHECK(muse == doctest::Approx(bo_muse_beta(sched)));
        CHECK(generic == doctest::Approx(srinivas_beta(3, sched.delta)));
        CHECK(expert < generic);
        CHECK(std::holds_alternative<PureExploration>(acquisition_for(pure_explorer_ai(), sched, m)));
        CHECK(std::holds_alternative<ExpectedImprovement>(
            acquisition_for(simulated_expert(nullptr, Policy::SimulatedExpertEi), sched, m)));
        CHECK_THROWS_AS(acquisition_for(live_human(), sched, m), StateError);
    }

    TEST_CASE("suggestions are deterministic in the seed") {
        const ObjectiveSpec o = builtin("matyas-2d");
        const auto data = matyas_init(o, 4, 5);
        SuggestContext ctx{o.bounds, o.sense, 77, std::nullopt, {}};
        CHECK(*suggest(bo_muse_ai(), data, BetaSchedule{}, ctx) == *suggest(bo_muse_ai(), data, BetaSchedule{}, ctx));
    }

    TEST_CASE("live human waits, accepts, and rejects with per-dimension detail") {
        const ObjectiveSpec o = builtin("matyas-2d");
        SuggestContext ctx{o.bounds, o.sense, 0, std::nullopt, {}};
        CHECK_FALSE(suggest(live_human(), {}, BetaSchedule{}, ctx).has_value());
        Vector x(2);
        x << 1.0, -2.0;
        ctx.posted = x;
        CHECK(*suggest(live_human(), {}, BetaSchedule{}, ctx) == x);
        x << 1.0, 11.0;
        ctx.posted = x;
        try {
            (void)suggest(live_human(), {}, BetaSchedule{}, ctx);
            FAIL("expected OutOfBoundsError");
        } catch (const OutOfBoundsError& e) {
            CHECK(e.dimension == 1);
            CHECK(e.value == 11.0);
            CHECK(e.lower == -10.0);
            CHECK(e.upper == 10.0);
            const std::string msg = e.what();
            CHECK(msg.find("dimension 1") != std::string::npos);
            CHECK(msg.find("[-10, 10]") != std::string::npos);
        }
        CHECK_THROWS_AS(check_in_bounds(o.bounds, Vector::Zero(3)), InputError);
    }
}
