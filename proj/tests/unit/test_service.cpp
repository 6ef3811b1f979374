#include "bomuse/errors.hpp"
#include "bomuse/service.hpp"

#include <doctest.h>
#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

using namespace bomuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("bomuse-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

nlohmann::json machine_config(int budget = 3) {
    nlohmann::json c = SessionConfig::for_benchmark("matyas-2d", Mode::BoMuse, 4, 3, 2 * budget);
    return c;
}

nlohmann::json live_config(int budget = 2) {
    SessionConfig c = SessionConfig::for_benchmark("matyas-2d", Mode::BoMuse, 4, 3, 2 * budget);
    c.human_agent = live_human();
    return c;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Vector v2(double a, double b) {
    Vector x(2);
    x << a, b;
    return x;
}

}  // namespace

TEST_SUITE("service") {
    TEST_CASE("session ids") {
        CHECK(valid_session_id("abc-DEF_123"));
        CHECK_FALSE(valid_session_id(""));
        CHECK_FALSE(valid_session_id("../etc"));
        CHECK_FALSE(valid_session_id(std::string(65, 'a')));
        CHECK(phase_from_string(to_string(Phase::AwaitingHuman)) == Phase::AwaitingHuman);
    }

    TEST_CASE("creation phases and uniqueness") {
        TempDir dir;
        SessionStore store(dir.path);
        CHECK(store.create("m", machine_config()).phase == Phase::AwaitingAdvance);
        CHECK(store.create("h", live_config()).phase == Phase::AwaitingHuman);
        CHECK_THROWS_AS(store.create("m", machine_config()), ConflictError);
        const SessionState generated = store.create("", machine_config());
        CHECK(valid_session_id(generated.id));
        CHECK(store.list().size() == 3);
        CHECK(fs::exists(store.path_for("m")));
        CHECK_THROWS_AS((void)store.get("nope"), NotFoundError);
        nlohmann::json bad = machine_config();
        bad["budget_batches"] = 0;
        CHECK_THROWS_AS(store.create("bad", bad), InputError);
        CHECK_THROWS_AS(store.create("bad id!", machine_config()), InputError);
    }

    TEST_CASE("defaults fill unset fields only") {
        TempDir dir;
        SessionStore store(dir.path, ServiceDefaults{0.05, 9.0, 0.5});
        nlohmann::json c = machine_config();
        c.erase("delta");
        c.erase("zeta");
        c.erase("noise_std");
        const SessionState s = store.create("d", c);
        CHECK(s.snapshot.config.delta == 0.05);
        CHECK(s.snapshot.config.zeta == 9.0);
        CHECK(s.snapshot.config.noise_std == 0.5);
        nlohmann::json explicit_zeta = machine_config();
        explicit_zeta["zeta"] = 3.0;
        CHECK(store.create("e", explicit_zeta).snapshot.config.zeta == 3.0);
    }

    TEST_CASE("live human lifecycle") {
        TempDir dir;
        SessionStore store(dir.path);
        store.create("live", live_config(2));
        CHECK_THROWS_AS(store.advance("live"), StateError);

        try {
            store.post_suggestion("live", v2(0.0, 12.0));
            FAIL("expected OutOfBoundsError");
        } catch (const OutOfBoundsError& e) {
            CHECK(e.dimension == 1);
            CHECK(e.lower == -10.0);
            CHECK(e.upper == 10.0);
        }
        CHECK(store.get("live").phase == Phase::AwaitingHuman);

        CHECK(store.post_suggestion("live", v2(1.0, 2.0)).phase == Phase::AwaitingAdvance);
        CHECK_THROWS_AS(store.post_suggestion("live", v2(3.0, 3.0)), StateError);
        CHECK(*store.get("live").snapshot.pending_human == v2(1.0, 2.0));

        auto [rec, state] = store.advance("live");
        CHECK(*rec.x_human == v2(1.0, 2.0));
        CHECK(state.phase == Phase::AwaitingHuman);
        store.post_suggestion("live", v2(-1.0, 0.0));
        auto [rec2, done] = store.advance("live");
        CHECK(rec2.s == 2);
        CHECK(done.phase == Phase::Finished);
        CHECK_THROWS_AS(store.advance("live"), StateError);
        CHECK_THROWS_AS(store.post_suggestion("live", v2(0.0, 0.0)), StateError);
    }

    TEST_CASE("state reloads byte-identical after a restart") {
        TempDir dir;
        std::string before;
        {
            SessionStore store(dir.path);
            store.create("p", machine_config(3));
            store.advance("p");
            before = read_file(store.path_for("p"));
        }
        SessionStore reopened(dir.path);
        const SessionState s = reopened.get("p");
        CHECK(s.snapshot.records.size() == 1);
        CHECK(reopened.list() == std::vector<std::string>{"p"});
        CHECK(read_file(reopened.path_for("p")) == before);
        // Continuing from disk matches an uninterrupted run.
        reopened.advance("p");
        reopened.advance("p");
        const SessionResult direct = run_session(machine_config(3).get<SessionConfig>());
        CHECK(reopened.get("p").snapshot.records == direct.records);
        CHECK(reopened.get("p").snapshot.observations == direct.observations);
        CHECK_FALSE(fs::exists(fs::path(reopened.path_for("p")).concat(".tmp")));
    }

    TEST_CASE("public view withholds the truth while running") {
        TempDir dir;
        SessionStore store(dir.path);
        store.create("v", machine_config(2));
        store.advance("v");
        const nlohmann::json running = public_view(store.get("v"));
        CHECK(running.at("phase") == "awaiting_advance");
        for (const auto& o : running.at("observations")) CHECK_FALSE(o.contains("f_true"));
        CHECK_FALSE(running.at("config").at("objective").contains("optimum_value"));
        const std::string csv = store.export_csv("v");
        CHECK(csv.find("f_star") != std::string::npos);
        std::istringstream lines(csv);
        std::string header, first;
        std::getline(lines, header);
        std::getline(lines, first);
        CHECK(first.find(",,,,") != std::string::npos);

        store.advance("v");
        const std::string done_csv = store.export_csv("v");
        std::istringstream done_lines(done_csv);
        std::getline(done_lines, header);
        std::getline(done_lines, first);
        CHECK(first.find(",,,,") == std::string::npos);
        const nlohmann::json finished = public_view(store.get("v"));
        CHECK(finished.at("observations")[0].contains("f_true"));
    }

    TEST_CASE("concurrent advances on one session serialize") {
        TempDir dir;
        SessionStore store(dir.path);
        store.create("c", machine_config(4));
        std::atomic<int> ok{0};
        std::atomic<int> refused{0};
        std::vector<std::thread> threads;
        for (int i = 0; i < 6; ++i) {
            threads.emplace_back([&] {
                try {
                    store.advance("c");
                    ++ok;
                } catch (const StateError&) {
                    ++refused;
                }
            });
        }
        for (auto& t : threads) t.join();
        CHECK(ok == 4);
        CHECK(refused == 2);
        const SessionState s = store.get("c");
        CHECK(s.phase == Phase::Finished);
        for (std::size_t i = 0; i < s.snapshot.records.size(); ++i) CHECK(s.snapshot.records[i].s == static_cast<int>(i) + 1);
    }

    TEST_CASE("HTTP API round trip") {
        TempDir dir;
        SessionStore store(dir.path);
        Server server(store, ServerOptions{"127.0.0.1", 0, 4});
        server.bind();
        REQUIRE(server.port() > 0);
        std::thread t([&] { server.listen(); });
        httplib::Client cli("127.0.0.1", server.port());
        for (int i = 0; i < 100 && !cli.Get("/healthz"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(20));

        auto health = cli.Get("/healthz");
        REQUIRE(health);
        CHECK(health->body == "ok");

        auto created = cli.Post("/sessions", nlohmann::json{{"id", "web"}, {"config", live_config(1)}}.dump(),
                                "application/json");
        REQUIRE(created);
        CHECK(created->status == 201);
        CHECK(nlohmann::json::parse(created->body).at("phase") == "awaiting_human");

        auto dup = cli.Post("/sessions", nlohmann::json{{"id", "web"}, {"config", live_config(1)}}.dump(),
                            "application/json");
        CHECK(dup->status == 409);

        auto oob = cli.Post("/sessions/web/suggestion", R"({"x": [0.0, 99.0]})", "application/json");
        CHECK(oob->status == 400);
        const auto detail = nlohmann::json::parse(oob->body);
        CHECK(detail.at("error") == "out_of_bounds");
        CHECK(detail.at("dimension") == 1);
        CHECK(detail.at("lower") == -10.0);
        CHECK(detail.at("upper") == 10.0);

        CHECK(cli.Post("/sessions/web/advance", "", "application/json")->status == 409);
        CHECK(cli.Post("/sessions/web/suggestion", R"({"x": [1.0, 1.0]})", "application/json")->status == 200);
        auto adv = cli.Post("/sessions/web/advance", "", "application/json");
        REQUIRE(adv);
        CHECK(adv->status == 200);
        CHECK(nlohmann::json::parse(adv->body).at("phase") == "finished");

        CHECK(cli.Get("/sessions/missing")->status == 404);
        CHECK(cli.Post("/sessions", "{not json", "application/json")->status == 400);
        auto listed = cli.Get("/sessions");
        CHECK(nlohmann::json::parse(listed->body).at("sessions") == nlohmann::json::array({"web"}));
        auto csv = cli.Get("/sessions/web/export.csv");
        CHECK(csv->status == 200);
        CHECK(csv->body.rfind("s,t,source,x0,x1,y", 0) == 0);

        server.stop();
        t.join();
    }

    TEST_CASE("binding an occupied port is a startup error") {
        TempDir dir;
        SessionStore store(dir.path);
        Server first(store, ServerOptions{"127.0.0.1", 0, 1});
        first.bind();
        Server second(store, ServerOptions{"127.0.0.1", first.port(), 1});
        CHECK_THROWS_AS(second.bind(), StartupError);
    }
}
