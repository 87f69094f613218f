#include "tetrabot/service/server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "tetrabot/session.hpp"

namespace tetrabot::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

using Payload = std::shared_ptr<const std::string>;

Payload make_payload(std::string s) { return std::make_shared<const std::string>(std::move(s)); }

constexpr std::size_t kMaxInboundBytes = 64 * 1024;

struct Inbound {
    std::uint64_t conn = 0;
    CommandMessage command;
};

struct ReplayStopped {};

}  // namespace

class Connection;

struct TelemetryServer::Impl {
    Impl(SessionConfig c, ServerOptions o)
        : config(std::move(c))
        , options(std::move(o))
    {
        config.validate();
        if (options.outbox_limit == 0) throw ConfigError("outbox_limit must be > 0");
    }

    unsigned short bind();
    void do_accept();
    void run_live();
    void run_replay(std::string path, ReplayOptions replay, bool start_now);
    void finish();
    void stop();

    // I/O thread only
    void on_open(const std::shared_ptr<Connection>& c);
    void on_message(const std::shared_ptr<Connection>& c, const std::string& text);
    void on_close(std::uint64_t id);
    void broadcast(const Payload& msg);
    void send_to(std::uint64_t id, const Payload& msg);
    void close_all();

    // called from the worker thread
    void post_broadcast(Payload msg)
    {
        asio::post(io, [this, msg = std::move(msg)] { broadcast(msg); });
    }
    void post_reply(std::uint64_t id, Payload msg)
    {
        asio::post(io, [this, id, msg = std::move(msg)] { send_to(id, msg); });
    }

    SessionConfig config;
    ServerOptions options;

    asio::io_context io;
    tcp::acceptor acceptor{io};
    asio::steady_timer shutdown_timer{io};
    std::thread io_thread;
    std::thread worker;

    // I/O thread state
    std::map<std::uint64_t, std::shared_ptr<Connection>> conns;
    std::optional<std::uint64_t> driver;
    std::uint64_t next_id = 1;
    bool replay_mode = false;
    bool shutting_down = false;

    std::mutex inbound_mu;
    std::vector<Inbound> inbound;

    std::atomic<bool> stopping{false};
    std::atomic<std::int64_t> ticks{0};
    std::atomic<std::uint64_t> dropped{0};
    std::atomic<std::size_t> clients{0};

    std::mutex state_mu;
    std::condition_variable state_cv;
    bool done = false;
    bool client_seen = false;
    bool stopped = false;
    std::optional<ReplayResult> replay_result;
};

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, TelemetryServer::Impl& server, std::uint64_t id)
        : ws_(std::move(socket))
        , server_(server)
        , id_(id)
    {
    }

    std::uint64_t id() const { return id_; }
    SeqTracker& seq() { return seq_; }

    void start()
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(kMaxInboundBytes);
        ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
    }

    void send(Payload msg, bool droppable)
    {
        if (!open_ || closing_) return;
        if (droppable) {
            const std::size_t first = writing_ ? 1 : 0;
            std::size_t queued = 0;
            for (std::size_t i = first; i < outbox_.size(); ++i) queued += outbox_[i].droppable ? 1 : 0;
            if (queued >= server_.options.outbox_limit) {
                for (std::size_t i = first; i < outbox_.size(); ++i) {
                    if (outbox_[i].droppable) {
                        outbox_.erase(outbox_.begin() + static_cast<std::ptrdiff_t>(i));
                        server_.dropped.fetch_add(1, std::memory_order_relaxed);
                        break;
                    }
                }
            }
        }
        outbox_.push_back({std::move(msg), droppable});
        if (!writing_) do_write();
    }

    void shutdown()
    {
        if (!open_) {
            beast::get_lowest_layer(ws_).close();
            return;
        }
        closing_ = true;
        if (!writing_) do_close();
    }

private:
    struct Outgoing {
        Payload msg;
        bool droppable = false;
    };

    void on_accept(beast::error_code ec)
    {
        if (ec) return server_.on_close(id_);
        open_ = true;
        server_.on_open(shared_from_this());
        do_read();
    }

    void do_read()
    {
        ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) return server_.on_close(id_);
        if (!closing_) server_.on_message(shared_from_this(), beast::buffers_to_string(buffer_.data()));
        buffer_.consume(buffer_.size());
        do_read();
    }

    void do_write()
    {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(*outbox_.front().msg),
                        beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t)
    {
        writing_ = false;
        if (ec) {
            outbox_.clear();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) return do_write();
        if (closing_) do_close();
    }

    void do_close()
    {
        if (close_sent_) return;
        close_sent_ = true;
        ws_.async_close(websocket::close_code::going_away, [self = shared_from_this()](beast::error_code) {});
    }

    websocket::stream<beast::tcp_stream> ws_;
    TelemetryServer::Impl& server_;
    std::uint64_t id_;
    beast::flat_buffer buffer_;
    std::deque<Outgoing> outbox_;
    SeqTracker seq_;
    bool open_ = false;
    bool writing_ = false;
    bool closing_ = false;
    bool close_sent_ = false;
};

// ---------------------------------------------------------------------------
// I/O thread

unsigned short TelemetryServer::Impl::bind()
{
    const tcp::endpoint ep{asio::ip::make_address(options.address), options.port};
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen(asio::socket_base::max_listen_connections);
    do_accept();
    io_thread = std::thread([this] { io.run(); });
    return acceptor.local_endpoint().port();
}

void TelemetryServer::Impl::do_accept()
{
    acceptor.async_accept(asio::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;  // acceptor closed
        if (shutting_down) return;
        const std::uint64_t id = next_id++;
        auto c = std::make_shared<Connection>(std::move(socket), *this, id);
        conns.emplace(id, c);
        c->start();
        do_accept();
    });
}

void TelemetryServer::Impl::on_open(const std::shared_ptr<Connection>& c)
{
    ClientRole role = ClientRole::Viewer;
    if (!replay_mode && !driver) {
        driver = c->id();
        role = ClientRole::Driver;
    }
    clients.store(conns.size());
    c->send(make_payload(hello_message(config, role, replay_mode)), false);
    {
        std::lock_guard lock(state_mu);
        client_seen = true;
    }
    state_cv.notify_all();
}

void TelemetryServer::Impl::on_message(const std::shared_ptr<Connection>& c, const std::string& text)
{
    auto reply = [&](const std::string& m) { c->send(make_payload(m), false); };
    ClientMessage msg;
    try {
        msg = parse_client_message(text);
    } catch (const ProtocolError& e) {
        return reply(error_message(e.code(), e.what(), e.seq()));
    }
    const std::uint64_t seq = std::visit([](const auto& m) { return m.seq; }, msg);
    if (!c->seq().accept(seq)) return reply(error_message("seq_order", "seq must increase on every message", seq));

    if (const auto* s = std::get_if<SessionMessage>(&msg)) {
        if (s->action == SessionAction::RequestDriver) {
            if (replay_mode) return reply(error_message("replay_mode", "replay sessions have no driver", seq));
            if (driver && *driver != c->id()) {
                return reply(error_message("driver_conflict", "another client is driving", seq));
            }
            driver = c->id();
            reply(role_message(ClientRole::Driver));
        } else {
            if (driver == c->id()) driver.reset();
            reply(role_message(ClientRole::Viewer));
        }
        return reply(ack_message(seq));
    }

    if (replay_mode) return reply(error_message("replay_mode", "commands are ignored during replay", seq));
    if (driver != c->id()) return reply(error_message("not_driver", "only the driver may send commands", seq));
    std::lock_guard lock(inbound_mu);
    inbound.push_back({c->id(), std::get<CommandMessage>(std::move(msg))});
}

void TelemetryServer::Impl::on_close(std::uint64_t id)
{
    conns.erase(id);
    if (driver == id) driver.reset();
    clients.store(conns.size());
    if (shutting_down && conns.empty()) shutdown_timer.cancel();
}

void TelemetryServer::Impl::broadcast(const Payload& msg)
{
    for (auto& [id, c] : conns) c->send(msg, true);
}

void TelemetryServer::Impl::send_to(std::uint64_t id, const Payload& msg)
{
    if (auto it = conns.find(id); it != conns.end()) it->second->send(msg, false);
}

void TelemetryServer::Impl::close_all()
{
    shutting_down = true;
    beast::error_code ec;
    acceptor.close(ec);
    if (conns.empty()) return;
    // give clients a moment to receive queued messages and the close frame
    shutdown_timer.expires_after(std::chrono::seconds(1));
    shutdown_timer.async_wait([this](beast::error_code) { io.stop(); });
    const auto snapshot = conns;
    for (auto& [id, c] : snapshot) c->shutdown();
}

// ---------------------------------------------------------------------------
// Worker thread

void TelemetryServer::Impl::run_live()
{
    Session session(config);
    std::ofstream file;
    std::optional<TelemetryRecorder> recorder;
    if (options.record_path) {
        file.open(*options.record_path, std::ios::binary | std::ios::trunc);
        if (file) recorder.emplace(file, config);
    }

    using clock = std::chrono::steady_clock;
    const auto period =
        std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / config.tick_hz));
    auto next = clock::now();
    std::vector<Inbound> batch;
    while (!stopping.load()) {
        {
            std::lock_guard lock(inbound_mu);
            batch.swap(inbound);
        }
        for (const auto& in : batch) {
            try {
                session.apply(in.command);
                post_reply(in.conn, make_payload(ack_message(in.command.seq)));
            } catch (const ProtocolError& e) {
                post_reply(in.conn, make_payload(error_message(e.code(), e.what(), e.seq())));
            }
        }
        batch.clear();

        const std::string payload = session.tick(options.with_curves);
        ticks.fetch_add(1);
        if (recorder) recorder->record(payload);
        post_broadcast(make_payload(telemetry_message(payload)));

        next += period;
        const auto now = clock::now();
        if (now > next + period) next = now;  // fell behind; do not burst
        std::this_thread::sleep_until(next);
    }
    if (recorder) recorder->flush();
}

void TelemetryServer::Impl::run_replay(std::string path, ReplayOptions replay, bool start_now)
{
    if (!start_now) {
        std::unique_lock lock(state_mu);
        state_cv.wait(lock, [this] { return client_seen || stopping.load(); });
    }
    ReplayResult result;
    std::ifstream in(path, std::ios::binary);
    replay.force = true;  // hash already checked in start_replay
    try {
        result = replay_log(in, config, replay, [this](const std::string& payload) {
            if (stopping.load()) throw ReplayStopped{};
            ticks.fetch_add(1);
            post_broadcast(make_payload(telemetry_message(payload)));
        });
    } catch (const ReplayStopped&) {
        result.diagnostic = "replay stopped";
    } catch (const std::exception& e) {
        result.truncated = true;
        result.diagnostic = e.what();
    }
    const nlohmann::json end = {{"type", "replay_end"},
                                {"frames", ticks.load()},
                                {"truncated", result.truncated},
                                {"diagnostic", result.diagnostic}};
    post_broadcast(make_payload(end.dump()));
    {
        std::lock_guard lock(state_mu);
        replay_result = result;
        done = true;
    }
    state_cv.notify_all();
}

void TelemetryServer::Impl::stop()
{
    {
        std::lock_guard lock(state_mu);
        if (stopped) return;
        stopped = true;
        done = true;
    }
    stopping.store(true);
    state_cv.notify_all();
    if (worker.joinable()) worker.join();
    if (io_thread.joinable()) {
        asio::post(io, [this] { close_all(); });
        io_thread.join();
    }
}

// ---------------------------------------------------------------------------

TelemetryServer::TelemetryServer(SessionConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options)))
{
}

TelemetryServer::~TelemetryServer() { stop(); }

unsigned short TelemetryServer::start_live()
{
    if (impl_->io_thread.joinable()) throw std::logic_error("server already started");
    const unsigned short port = impl_->bind();
    impl_->worker = std::thread([this] { impl_->run_live(); });
    return port;
}

unsigned short TelemetryServer::start_replay(const std::string& log_path, const ReplayOptions& replay, bool start_now)
{
    if (impl_->io_thread.joinable()) throw std::logic_error("server already started");
    {
        std::ifstream in(log_path, std::ios::binary);
        if (!in) throw LogError("cannot open log " + log_path);
        const LogHeader header = read_log_header(in);
        const std::string expected = config_hash(impl_->config);
        if (!replay.force && header.config_hash != expected) {
            throw LogError("log config hash " + header.config_hash + " does not match " + expected +
                           " (use --force to replay anyway)");
        }
        if (!(replay.speed_factor > 0.0)) throw LogError("speed factor must be > 0");
    }
    impl_->replay_mode = true;
    const unsigned short port = impl_->bind();
    impl_->worker = std::thread([this, log_path, replay, start_now] { impl_->run_replay(log_path, replay, start_now); });
    return port;
}

void TelemetryServer::wait()
{
    std::unique_lock lock(impl_->state_mu);
    impl_->state_cv.wait(lock, [this] { return impl_->done; });
}

void TelemetryServer::stop() { impl_->stop(); }

ServerStats TelemetryServer::stats() const
{
    return {impl_->ticks.load(), impl_->dropped.load(), impl_->clients.load()};
}

std::optional<ReplayResult> TelemetryServer::replay_result() const
{
    std::lock_guard lock(impl_->state_mu);
    return impl_->replay_result;
}

}  // namespace tetrabot::service
