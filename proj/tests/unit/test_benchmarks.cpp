#include "bomuse/benchmarks.hpp"
#include "bomuse/errors.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cmath>
#include <numbers>
#include <thread>

using namespace bomuse;

TEST_SUITE("benchmarks") {
    TEST_CASE("builtins vanish at their optima") {
        for (const auto& name : builtin_names()) {
            const ObjectiveSpec o = builtin(name);
            REQUIRE(o.optimum_x);
            CHECK(o.bounds.dim() == o.dim);
            CHECK(o.bounds.contains(*o.optimum_x));
            CHECK(std::abs(o.eval(*o.optimum_x)) <= 1e-12);
            CHECK(o.feature_map != nullptr);
            CHECK(o.sense == Sense::Minimize);
        }
        CHECK(builtin("ackley").name == "ackley-4d");
        CHECK_THROWS_AS(builtin("branin"), InputError);
    }

    TEST_CASE("hand-evaluated points") {
        Vector r = Vector::Zero(5);
        r[0] = 1.0;
        CHECK(rastrigin(r) == doctest::Approx(1.0).epsilon(1e-12));
        Vector m(2);
        m << 1.0, 1.0;
        CHECK(matyas(m) == doctest::Approx(0.04));
        Vector a = Vector::Zero(4);
        a[0] = 1.0;
        const double expected = -20.0 * std::exp(-0.2 * std::sqrt(0.25)) -
                                std::exp((std::cos(2.0 * std::numbers::pi) + 3.0) / 4.0) + 20.0 + std::numbers::e;
        CHECK(ackley(a) == doctest::Approx(expected).epsilon(1e-12));
        // Levy at x = 5 everywhere: w = 2, sin(2 pi) = 0 so only (w-1)^2 (1 + 10 sin^2(2 pi + 1)) terms remain.
        const Vector l = Vector::Constant(6, 5.0);
        const double s = std::sin(2.0 * std::numbers::pi + 1.0);
        const double lv = 5.0 * (1.0 + 10.0 * s * s) + 1.0 * (1.0 + std::pow(std::sin(4.0 * std::numbers::pi), 2));
        CHECK(levy(l) == doctest::Approx(lv + std::pow(std::sin(2.0 * std::numbers::pi), 2)).epsilon(1e-12));
    }

    TEST_CASE("orientation and range") {
        const ObjectiveSpec o = builtin("matyas-2d");
        CHECK(o.oriented(2.0) == -2.0);
        const double range = estimate_range(o);
        CHECK(range > 0.0);
        CHECK(range <= 0.26 * 200.0 + 0.48 * 100.0);
    }

    TEST_CASE("objective config json round trip") {
        ObjectiveConfig c;
        c.kind = "subprocess";
        c.name = "ext";
        c.command = "./obj";
        Vector lo(2), hi(2);
        lo << 0, -1;
        hi << 1, 1;
        c.bounds = Bounds(lo, hi);
        c.sense = Sense::Maximize;
        c.optimum_value = 3.0;
        const nlohmann::json j = c;
        const ObjectiveConfig back = j.get<ObjectiveConfig>();
        CHECK(back.kind == "subprocess");
        CHECK(back.command == "./obj");
        REQUIRE(back.bounds);
        CHECK(*back.bounds == *c.bounds);
        CHECK(back.optimum_value == 3.0);
        CHECK(back.sense == Sense::Maximize);

        const auto b = nlohmann::json{{"name", "levy"}}.get<ObjectiveConfig>();
        CHECK(b.sense == Sense::Minimize);
        CHECK_THROWS_AS(make_objective(nlohmann::json{{"kind", "subprocess"}, {"name", "x"}}.get<ObjectiveConfig>()),
                        InputError);
        CHECK_THROWS_AS(make_objective(nlohmann::json{{"kind", "carrier-pigeon"}, {"name", "x"}}.get<ObjectiveConfig>()),
                        InputError);
    }

    TEST_CASE("subprocess objective speaks the line protocol") {
        ObjectiveConfig c;
        c.kind = "subprocess";
        c.name = "sum";
        c.command = "python3 -u -c \"import sys, json\nfor line in sys.stdin: print(json.dumps({'y': sum(json.loads(line)['x'])}))\"";
        c.bounds = Bounds::uniform(2, -1.0, 1.0);
        const ObjectiveSpec o = make_objective(c);
        Vector x(2);
        x << 0.25, 0.5;
        CHECK(o.eval(x) == doctest::Approx(0.75));
        x << -1.0, 0.0;
        CHECK(o.eval(x) == doctest::Approx(-1.0));
    }

    TEST_CASE("subprocess failures surface as evaluation errors") {
        SubprocessObjective dead("exit 0");
        CHECK_THROWS_AS(dead(Vector::Zero(1)), EvaluationError);
        SubprocessObjective garbage("while read l; do echo nope; done");
        CHECK_THROWS_AS(garbage(Vector::Zero(1)), EvaluationError);
    }

    TEST_CASE("http objective posts x and reads y") {
        httplib::Server server;
        server.Post("/f", [](const httplib::Request& req, httplib::Response& res) {
            const auto j = nlohmann::json::parse(req.body);
            double s = 0.0;
            for (double v : j.at("x")) s += v * v;
            res.set_content(nlohmann::json{{"y", s}}.dump(), "application/json");
        });
        const int port = server.bind_to_any_port("127.0.0.1");
        std::thread t([&] { server.listen_after_bind(); });
        server.wait_until_ready();
        Vector x(2);
        x << 1.0, 2.0;
        CHECK(http_objective_call("http://127.0.0.1:" + std::to_string(port) + "/f", x) == doctest::Approx(5.0));
        CHECK_THROWS_AS(http_objective_call("http://127.0.0.1:" + std::to_string(port) + "/missing", x),
                        EvaluationError);
        CHECK_THROWS_AS(http_objective_call("127.0.0.1/f", x), InputError);
        server.stop();
        t.join();
    }
}
