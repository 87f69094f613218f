// tetrabot: steering service, gait export, log replay and headless runs.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "tetrabot/config.hpp"
#include "tetrabot/service/server.hpp"
#include "tetrabot/session.hpp"

namespace {

using namespace tetrabot;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted.store(true); }

void install_signal_handlers()
{
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
}

SessionConfig session_config(const std::string& path, double tick_hz)
{
    SessionConfig c = path.empty() ? SessionConfig{} : load_config(path);
    if (tick_hz > 0.0) c.tick_hz = tick_hz;
    c.validate();
    return c;
}

void wait_until_interrupted(service::TelemetryServer& server, bool stop_when_done)
{
    std::atomic<bool> finished{false};
    std::thread waiter;
    if (stop_when_done) {
        waiter = std::thread([&] {
            server.wait();
            finished.store(true);
        });
    }
    while (!g_interrupted.load() && !finished.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    if (waiter.joinable()) waiter.join();
}

int cmd_run(const std::string& config_path, const std::string& address, unsigned short port, double tick_hz,
            const std::string& record, bool no_curves)
{
    const SessionConfig config = session_config(config_path, tick_hz);
    service::ServerOptions opt;
    opt.address = address;
    opt.port = port;
    opt.with_curves = !no_curves;
    if (!record.empty()) opt.record_path = record;
    service::TelemetryServer server(config, opt);
    const unsigned short bound = server.start_live();
    std::cerr << "tetrabot: serving ws://" << address << ':' << bound << "/ at " << config.tick_hz
              << " Hz (config " << config_hash(config) << ")\n";
    install_signal_handlers();
    wait_until_interrupted(server, false);
    std::cerr << "tetrabot: stopped after " << server.stats().ticks << " ticks\n";
    return 0;
}

int cmd_export(const std::string& config_path, const std::string& mode_name, double rho, double rho4, int tau,
               const std::string& out_path)
{
    const SessionConfig config = session_config(config_path, 0.0);
    const auto mode = gait_mode_from_string(mode_name);
    if (!mode) throw ConfigError("unknown gait mode '" + mode_name + "'");
    GaitParams p = config.base_gait();
    p.tau = tau;
    switch (*mode) {
    case GaitMode::Idle: break;
    case GaitMode::Forward:
    case GaitMode::Backward: p.rho3 = p.rho4 = rho; break;
    case GaitMode::TurnWhileMoving:
        p.rho3 = rho;
        p.rho4 = rho4 < 0.0 ? rho : rho4;
        break;
    case GaitMode::InPlaceLeft:
    case GaitMode::InPlaceRight: p.rho_inplace = rho; break;
    }
    p.validate();
    if (out_path == "-") {
        write_schedule_csv(std::cout, *mode, p, config.geometry);
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    write_schedule_csv(out, *mode, p, config.geometry);
    out.close();
    if (!out) throw std::runtime_error("error writing " + out_path);
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& log_path, double speed, bool force,
               const std::string& address, unsigned short port, bool to_stdout)
{
    const SessionConfig config = session_config(config_path, 0.0);
    ReplayOptions ropt;
    ropt.speed_factor = speed;
    ropt.force = force;
    if (to_stdout) {
        std::ifstream in(log_path, std::ios::binary);
        if (!in) throw LogError("cannot open log " + log_path);
        const auto result = replay_log(in, config, ropt, [](const std::string& p) { std::cout << p << '\n'; });
        std::cout.flush();
        if (result.truncated) {
            std::cerr << "tetrabot: " << result.diagnostic << '\n';
            return 3;
        }
        return 0;
    }
    service::ServerOptions opt;
    opt.address = address;
    opt.port = port;
    service::TelemetryServer server(config, opt);
    const unsigned short bound = server.start_replay(log_path, ropt);
    std::cerr << "tetrabot: replay on ws://" << address << ':' << bound << "/ starts when a client connects\n";
    install_signal_handlers();
    wait_until_interrupted(server, true);
    if (const auto r = server.replay_result()) {
        std::cerr << "tetrabot: replayed " << r->frames << " frames\n";
        if (r->truncated) {
            std::cerr << "tetrabot: " << r->diagnostic << '\n';
            return 3;
        }
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, long ticks, double sx, double sy, const std::string& record,
                 bool no_curves)
{
    const SessionConfig config = session_config(config_path, 0.0);
    Session session(config);
    CommandMessage js{CommandKind::Joystick, 1, JoystickPayload{AxisUnit::Sigma, sx, sy, false}};
    session.apply(js);
    std::ofstream file;
    std::optional<TelemetryRecorder> recorder;
    if (!record.empty()) {
        file.open(record, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error("cannot write " + record);
        recorder.emplace(file, config);
    }
    for (long i = 0; i < ticks; ++i) {
        const std::string payload = session.tick(!no_curves);
        if (recorder) recorder->record(payload);
    }
    const auto& s = session.state();
    std::cout << "tick " << s.tick << " mode " << to_string(s.mode) << " x " << s.pose.x << " y " << s.pose.y
              << " psi " << s.pose.psi << " margin " << s.margin << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Soft tetrahedral robot: steering service and gait tools"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Session config file (JSON); defaults when omitted");

    auto* run = app.add_subcommand("run", "Serve the live simulator over WebSocket");
    std::string address = "127.0.0.1";
    unsigned short port = 8765;
    double tick_hz = 0.0;
    std::string record;
    bool no_curves = false;
    run->add_option("--address", address, "Listen address")->capture_default_str();
    run->add_option("--port", port, "Listen port (0 = any free port)")->capture_default_str();
    run->add_option("--tick-hz", tick_hz, "Tick rate; overrides the config (default 50)");
    run->add_option("--record", record, "Write a telemetry log to this path");
    run->add_flag("--no-curves", no_curves, "Omit sampled limb curves from frames");

    auto* exp = app.add_subcommand("export-gait", "Write one cycle of the pressure schedule as CSV");
    std::string mode = "forward";
    double rho = 0.1;
    double rho4 = -1.0;
    int tau = 100;
    std::string out = "-";
    exp->add_option("--mode", mode, "idle|forward|backward|turn_while_moving|in_place_left|in_place_right")
        ->capture_default_str();
    exp->add_option("--rho", rho, "Gait radius [m] (rho3 when turning)")->capture_default_str();
    exp->add_option("--rho4", rho4, "Limb4 radius for turn_while_moving (default: --rho)");
    exp->add_option("--tau", tau, "Ticks per cycle")->capture_default_str();
    exp->add_option("--out", out, "Output path, '-' for stdout")->capture_default_str();

    auto* rep = app.add_subcommand("replay", "Re-broadcast a recorded telemetry log");
    std::string log_path;
    double speed = 1.0;
    bool force = false;
    bool to_stdout = false;
    rep->add_option("--log", log_path, "Telemetry log to replay")->required();
    rep->add_option("--speed", speed, "Playback speed factor")->capture_default_str();
    rep->add_flag("--force", force, "Replay even if the config hash differs");
    rep->add_option("--address", address, "Listen address")->capture_default_str();
    rep->add_option("--port", port, "Listen port (0 = any free port)")->capture_default_str();
    rep->add_flag("--stdout", to_stdout, "Print frame payloads instead of serving them");

    auto* sim = app.add_subcommand("simulate", "Run the simulator headless with a fixed joystick");
    long ticks = 500;
    double sx = 0.0;
    double sy = 0.08;
    sim->add_option("--ticks", ticks, "Ticks to run")->capture_default_str();
    sim->add_option("--sigma-x", sx, "Joystick x axis [m]")->capture_default_str();
    sim->add_option("--sigma-y", sy, "Joystick y axis [m]")->capture_default_str();
    sim->add_option("--record", record, "Write a telemetry log to this path");
    sim->add_flag("--no-curves", no_curves, "Omit sampled limb curves from frames");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, address, port, tick_hz, record, no_curves);
        if (*exp) return cmd_export(config_path, mode, rho, rho4, tau, out);
        if (*rep) return cmd_replay(config_path, log_path, speed, force, address, port, to_stdout);
        if (*sim) return cmd_simulate(config_path, ticks, sx, sy, record, no_curves);
    } catch (const std::exception& e) {
        std::cerr << "tetrabot: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
