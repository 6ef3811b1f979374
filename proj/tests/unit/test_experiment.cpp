#include "bomuse/errors.hpp"
#include "bomuse/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace bomuse;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream s(line);
    std::string f;
    while (std::getline(s, f, ',')) out.push_back(f);
    return out;
}

ExperimentPlan small_plan() {
    ExperimentPlan p;
    p.modes = {Mode::BoMuse, Mode::GenericBo};
    p.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    p.iterations = 20;
    p.jobs = 2;
    return p;
}

}  // namespace

TEST_SUITE("experiment") {
    TEST_CASE("seed and mode lists") {
        CHECK(parse_seed_list("0-3,7") == std::vector<std::uint64_t>{0, 1, 2, 3, 7});
        CHECK(parse_seed_list("5") == std::vector<std::uint64_t>{5});
        CHECK_THROWS_AS(parse_seed_list("3-1"), InputError);
        CHECK_THROWS_AS(parse_seed_list("x"), InputError);
        CHECK(parse_mode_list("bo_muse,generic_bo") == std::vector<Mode>{Mode::BoMuse, Mode::GenericBo});
        CHECK_THROWS_AS(parse_mode_list("bogus"), InputError);
    }

    TEST_CASE("statistics helpers") {
        CHECK(median({3.0, 1.0, 2.0}) == 2.0);
        CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
        CHECK(standard_error({5.0}) == 0.0);
        // Sample sd of {1,2,3,4} is sqrt(5/3); divided by sqrt(4).
        CHECK(standard_error({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    }

    TEST_CASE("plan validation") {
        ExperimentPlan p = small_plan();
        p.seeds.clear();
        CHECK_THROWS_AS(p.validate(), InputError);
        p = small_plan();
        p.iterations = 0;
        CHECK_THROWS_AS(p.validate(), InputError);
        p = small_plan();
        p.benchmark = "nope";
        CHECK_THROWS_AS(p.validate(), InputError);
        CHECK(small_plan().session_config(Mode::BoMuse, 3).budget_batches == 10);
        CHECK(small_plan().session_config(Mode::GenericBo, 3).budget_batches == 20);
    }

    TEST_CASE("aggregate csv structure") {
        const ExperimentResult r = run_experiment(small_plan());
        CHECK(r.evaluations == 23);
        std::ostringstream out;
        write_aggregate_csv(out, r);
        const auto lines = split_lines(out.str());
        REQUIRE(lines.size() == 24);
        CHECK(lines[0] == "t,bo_muse_mean,bo_muse_se,generic_bo_mean,generic_bo_se");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split_fields(lines[i]);
            REQUIRE(f.size() == 5);
            CHECK(f[0] == std::to_string(i));
        }
        // The mean column is the seed average of simple regret.
        const auto last = split_fields(lines.back());
        double mean = 0.0;
        for (double v : r.final_regret(Mode::BoMuse)) mean += v;
        mean /= 10.0;
        CHECK(std::stod(last[1]) == doctest::Approx(mean).epsilon(1e-12));
        CHECK(std::stod(last[2]) == doctest::Approx(standard_error(r.final_regret(Mode::BoMuse))).epsilon(1e-12));

        std::ostringstream tidy;
        write_tidy_csv(tidy, r);
        const auto tl = split_lines(tidy.str());
        CHECK(tl[0] == "mode,seed,t,s,source,y,f_true,simple_regret");
        CHECK(tl.size() == 1 + 2 * 10 * 23);

        std::ostringstream summary;
        print_summary(summary, r);
        CHECK(summary.str().find("generic_bo") != std::string::npos);
    }

    TEST_CASE("single repeat has zero standard error") {
        ExperimentPlan p = small_plan();
        p.seeds = {4};
        p.iterations = 6;
        std::ostringstream out;
        write_aggregate_csv(out, run_experiment(p));
        const auto lines = split_lines(out.str());
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split_fields(lines[i]);
            CHECK(f[2] == "0");
            CHECK(f[4] == "0");
        }
    }

    TEST_CASE("same plan gives identical bytes regardless of worker count") {
        ExperimentPlan p = small_plan();
        p.seeds = {0, 1, 2};
        p.iterations = 6;
        std::ostringstream a, b;
        write_aggregate_csv(a, run_experiment(p));
        p.jobs = 1;
        write_aggregate_csv(b, run_experiment(p));
        CHECK(a.str() == b.str());
    }

    TEST_CASE("odd budgets carry regret forward for paired modes") {
        ExperimentPlan p = small_plan();
        p.modes = {Mode::BoMuse};
        p.seeds = {1};
        p.iterations = 5;
        const ExperimentResult r = run_experiment(p);
        const auto& run = r.of(Mode::BoMuse).runs[0];
        CHECK(run.result.observations.size() == 7);
        REQUIRE(run.regret.size() == 8);
        CHECK(run.regret[7] == run.regret[6]);
    }

    TEST_CASE("theory command exit codes") {
        std::ostringstream out;
        CHECK(cmd_verify_theory(200, out) == 0);
        CHECK(nlohmann::json::parse(out.str()).at("passed") == true);
        std::ostringstream bad;
        const MeanFunction faulty = [](MeanOrder o, std::span<const double> a) {
            return 0.5 * generalized_mean(o, a);
        };
        CHECK(cmd_verify_theory(200, bad, 0, faulty) != 0);
    }

    TEST_CASE("bind parsing") {
        CHECK(parse_bind("0.0.0.0:9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
        CHECK(parse_bind("8081") == std::pair<std::string, int>{"127.0.0.1", 8081});
        CHECK_THROWS_AS(parse_bind("host:notaport"), InputError);
    }
}
