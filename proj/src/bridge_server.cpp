#include "fastmod/bridge_server.hpp"

#include <chrono>
#include <deque>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace fastmod {
namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

// Frames queued beyond this are dropped if they are state frames.
constexpr std::size_t kMaxQueuedFrames = 64;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const Scenario& scenario, const BridgeOptions& options)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(scenario, options) {
    const double wall = scenario.integrator.dt / options.time_scale;
    period_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wall));
  }

  void start() {
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    read();
    next_ = Clock::now();
    schedule();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    for (std::string& frame : session_.handle(text)) send(std::move(frame));
    read();
  }

  void schedule() {
    next_ += period_;
    timer_.expires_at(next_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) { self->on_tick(ec); });
  }

  void on_tick(beast::error_code ec) {
    if (ec || closed_) return;
    for (std::string& frame : session_.advance(session_.scenario().integrator.dt)) send(std::move(frame));
    schedule();
  }

  void send(std::string frame) {
    if (closed_) return;
    if (queue_.size() >= kMaxQueuedFrames && frame.rfind("{\"type\":\"state\"", 0) == 0) return;
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) write();
  }

  void close() {
    closed_ = true;
    timer_.cancel();
  }

  websocket::stream<tcp::socket> ws_;
  net::steady_timer timer_;
  BridgeSession session_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  Clock::duration period_{};
  Clock::time_point next_;
  bool closed_ = false;
};

}  // namespace

struct BridgeServer::Impl {
  Impl(Scenario s, std::uint16_t port, BridgeOptions o, const char* address)
      : scenario(std::move(s)), options(o), acceptor(ioc) {
    const tcp::endpoint endpoint(net::ip::make_address(address), port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint);
    acceptor.listen();
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      ++started;
      std::make_shared<Connection>(std::move(socket), scenario, options)->start();
      accept();
    });
  }

  Scenario scenario;
  BridgeOptions options;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::atomic<std::size_t> started{0};
};

BridgeServer::BridgeServer(Scenario scenario, std::uint16_t port, BridgeOptions options,
                           const char* address) {
  if (!(options.time_scale > 0.0)) throw Error(ErrorKind::kInvalidConfig, "time scale must be positive");
  // Validates the scenario before any client connects.
  BridgeSession probe(scenario, options);
  impl_ = std::make_unique<Impl>(std::move(scenario), port, options, address);
}

BridgeServer::~BridgeServer() { stop(); }

std::uint16_t BridgeServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void BridgeServer::run() {
  impl_->accept();
  impl_->ioc.run();
}

void BridgeServer::stop() { impl_->ioc.stop(); }

std::size_t BridgeServer::sessions_started() const { return impl_->started.load(); }

}  // namespace fastmod
