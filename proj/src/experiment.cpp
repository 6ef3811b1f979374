#include "bomuse/experiment.hpp"

#include "bomuse/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numeric>
#include <pthread.h>
#include <sstream>
#include <thread>

namespace bomuse {

void ExperimentPlan::validate() const {
    builtin(benchmark);
    if (modes.empty()) throw InputError("plan: at least one mode is required");
    if (seeds.empty()) throw InputError("plan: at least one seed is required");
    if (iterations < 1) throw InputError("plan: iterations must be >= 1");
    if (num_init < 0) throw InputError("plan: num_init must be >= 0");
    if (noise_std && !(*noise_std >= 0.0)) throw InputError("plan: sigma must be >= 0");
    if (jobs < 0) throw InputError("plan: jobs must be >= 0");
}

SessionConfig ExperimentPlan::session_config(Mode mode, std::uint64_t seed) const {
    SessionConfig c = SessionConfig::for_benchmark(benchmark, mode, seed, num_init, iterations);
    c.noise_std = noise_std;
    c.zeta = zeta;
    c.delta = delta;
    return c;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::uint64_t parse_u64(const std::string& s) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        throw InputError("not a seed: '" + s + "'");
    }
    if (pos != s.size() || s.front() == '-') throw InputError("not a seed: '" + s + "'");
    return v;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    for (const auto& part : split(text, ',')) {
        const auto dash = part.find('-', 1);
        if (dash == std::string::npos) {
            seeds.push_back(parse_u64(part));
            continue;
        }
        const std::uint64_t lo = parse_u64(part.substr(0, dash));
        const std::uint64_t hi = parse_u64(part.substr(dash + 1));
        if (hi < lo) throw InputError("empty seed range '" + part + "'");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw InputError("no seeds given");
    return seeds;
}

std::vector<Mode> parse_mode_list(const std::string& text) {
    std::vector<Mode> modes;
    for (const auto& part : split(text, ',')) {
        modes.push_back(mode_from_string(part));
    }
    if (modes.empty()) throw InputError("no modes given");
    return modes;
}

const ModeRuns& ExperimentResult::of(Mode mode) const {
    for (const auto& m : modes) {
        if (m.mode == mode) return m;
    }
    throw InputError("mode '" + to_string(mode) + "' is not part of this experiment");
}

std::vector<double> ExperimentResult::final_regret(Mode mode) const {
    std::vector<double> out;
    for (const auto& r : of(mode).runs) {
        out.push_back(r.regret.back());
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    ExperimentResult result;
    result.plan = plan;
    result.evaluations = plan.num_init + plan.iterations;

    const std::size_t n_seeds = plan.seeds.size();
    const std::size_t total = plan.modes.size() * n_seeds;
    std::vector<SeedRun> runs(total);
    std::vector<std::exception_ptr> errors(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                const Mode mode = plan.modes[i / n_seeds];
                const std::uint64_t seed = plan.seeds[i % n_seeds];
                SeedRun run;
                run.seed = seed;
                run.result = run_session(plan.session_config(mode, seed));
                if (!run.result.regret.has_optimum) {
                    throw StateError("benchmark has no known optimum");
                }
                run.regret = run.result.regret.simple_regret;
                if (run.regret.empty()) {
                    throw StateError("session produced no evaluations");
                }
                run.regret.resize(static_cast<std::size_t>(result.evaluations), run.regret.back());
                runs[i] = std::move(run);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = std::min<std::size_t>(total, plan.jobs > 0 ? static_cast<unsigned>(plan.jobs) : hw);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t m = 0; m < plan.modes.size(); ++m) {
        ModeRuns mr;
        mr.mode = plan.modes[m];
        for (std::size_t s = 0; s < n_seeds; ++s) {
            mr.runs.push_back(std::move(runs[m * n_seeds + s]));
        }
        result.modes.push_back(std::move(mr));
    }
    return result;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InputError("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double standard_error(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

void write_aggregate_csv(std::ostream& out, const ExperimentResult& result) {
    out << "t";
    for (const auto& m : result.modes) {
        out << ',' << to_string(m.mode) << "_mean," << to_string(m.mode) << "_se";
    }
    out << '\n';
    for (int t = 0; t < result.evaluations; ++t) {
        out << (t + 1);
        for (const auto& m : result.modes) {
            std::vector<double> column;
            for (const auto& r : m.runs) column.push_back(r.regret[static_cast<std::size_t>(t)]);
            const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
            out << ',' << format_number(mean) << ',' << format_number(standard_error(column));
        }
        out << '\n';
    }
}

void write_tidy_csv(std::ostream& out, const ExperimentResult& result) {
    out << "mode,seed,t,s,source,y,f_true,simple_regret\n";
    for (const auto& m : result.modes) {
        for (const auto& r : m.runs) {
            const auto& obs = r.result.observations;
            for (std::size_t t = 0; t < r.regret.size(); ++t) {
                out << to_string(m.mode) << ',' << r.seed << ',' << (t + 1) << ',';
                if (t < obs.size()) {
                    out << obs[t].batch << ',' << to_string(obs[t].source) << ',' << format_number(obs[t].y) << ','
                        << (obs[t].f_true ? format_number(*obs[t].f_true) : std::string());
                } else {
                    out << ",,,";
                }
                out << ',' << format_number(r.regret[t]) << '\n';
            }
        }
    }
}

namespace {

std::string short_number(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

}  // namespace

void print_summary(std::ostream& out, const ExperimentResult& result) {
    const auto& plan = result.plan;
    out << "benchmark " << plan.benchmark << ", " << plan.repeats() << " seeds, " << plan.num_init << " + "
        << plan.iterations << " evaluations\n";
    out << std::left << std::setw(30) << "mode" << std::setw(14) << "median" << std::setw(14) << "mean"
        << std::setw(14) << "se";
    const Mode ref = result.modes.front().mode;
    out << "wins of " << to_string(ref) << '\n';
    const auto ref_final = result.final_regret(ref);
    for (const auto& m : result.modes) {
        const auto fin = result.final_regret(m.mode);
        const double mean = std::accumulate(fin.begin(), fin.end(), 0.0) / static_cast<double>(fin.size());
        int wins = 0;
        for (std::size_t i = 0; i < fin.size(); ++i) {
            if (ref_final[i] <= fin[i]) ++wins;
        }
        out << std::left << std::setw(30) << to_string(m.mode) << std::setw(14) << short_number(median(fin))
            << std::setw(14) << short_number(mean) << std::setw(14) << short_number(standard_error(fin));
        if (m.mode == ref) {
            out << "-";
        } else {
            out << wins << '/' << fin.size();
        }
        out << '\n';
    }
}

int cmd_run(const ExperimentPlan& plan, std::ostream& log) {
    ExperimentResult result;
    try {
        result = run_experiment(plan);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
    if (!plan.out.empty()) {
        if (plan.out.has_parent_path()) {
            std::filesystem::create_directories(plan.out.parent_path());
        }
        std::ofstream agg(plan.out, std::ios::binary);
        write_aggregate_csv(agg, result);
        auto tidy_path = plan.out.parent_path() / (plan.out.stem().string() + "_tidy.csv");
        std::ofstream tidy(tidy_path, std::ios::binary);
        write_tidy_csv(tidy, result);
        if (!agg || !tidy) {
            log << "error: failed to write " << plan.out << '\n';
            return 1;
        }
    } else {
        write_aggregate_csv(log, result);
    }
    print_summary(log, result);
    return 0;
}

int cmd_verify_theory(int trials, std::ostream& out, std::uint64_t seed, const MeanFunction& mean) {
    TheoryReport report;
    try {
        report = verify_theory(trials, seed, mean);
    } catch (const std::exception& e) {
        out << nlohmann::json{{"passed", false}, {"error", e.what()}}.dump(2) << '\n';
        return 1;
    }
    out << report.to_json().dump(2) << '\n';
    return report.passed() ? 0 : 1;
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
    std::string host = "127.0.0.1";
    std::string port_text = bind;
    if (const auto colon = bind.rfind(':'); colon != std::string::npos) {
        host = bind.substr(0, colon);
        port_text = bind.substr(colon + 1);
    }
    int port = -1;
    try {
        std::size_t pos = 0;
        port = std::stoi(port_text, &pos);
        if (pos != port_text.size()) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (host.empty() || port < 0 || port > 65535) {
        throw InputError("bind address must look like host:port, got '" + bind + "'");
    }
    return {host, port};
}

int cmd_serve(const ServeOptions& options, std::ostream& log) {
    std::pair<std::string, int> address;
    std::unique_ptr<SessionStore> store;
    try {
        address = parse_bind(options.bind);
        store = std::make_unique<SessionStore>(options.data_dir, options.defaults);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    }

    // Block the stop signals everywhere so the waiter below receives them.
    sigset_t stop_signals;
    sigemptyset(&stop_signals);
    sigaddset(&stop_signals, SIGTERM);
    sigaddset(&stop_signals, SIGINT);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);

    Server server(*store, ServerOptions{address.first, address.second, options.threads});
    try {
        server.bind();
    } catch (const std::exception& e) {
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        log << "error: " << e.what() << '\n';
        return 2;
    }
    log << "listening on " << address.first << ':' << server.port() << std::endl;

    std::atomic<bool> done{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        // The signal may land before listen() starts; keep asking until it ends.
        while (!done) {
            server.stop();
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
    });
    server.listen();
    done = true;
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    log << "stopped" << std::endl;
    return 0;
}

}  // namespace bomuse
