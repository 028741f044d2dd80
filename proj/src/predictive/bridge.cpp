#include "pfnts/bridge.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "pfnts/errors.hpp"

extern char** environ;

namespace pfnts {

namespace {

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

std::vector<double> to_doubles(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw BridgeProtocolError(std::string("field '") + field + "' is not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw BridgeProtocolError(std::string("non-numeric entry in '") + field + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

nlohmann::json vector_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

BridgeSession::BridgeSession(BridgeOptions options) : options_(std::move(options)) {
  if (options_.command.empty()) throw ParamError("bridge command is empty");
  ignore_sigpipe();

  int in_pipe[2];   // parent -> child stdin
  int out_pipe[2];  // child stdout -> parent
  if (::pipe(in_pipe) != 0) throw Error("pipe() failed: " + std::string(std::strerror(errno)));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error("pipe() failed: " + std::string(std::strerror(errno)));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::vector<char*> argv;
  for (auto& arg : options_.command) argv.push_back(arg.data());
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw Error("failed to launch bridge server '" + options_.command[0] + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

BridgeSession::~BridgeSession() {
  if (!is_open()) return;
  try {
    shutdown();
  } catch (...) {
    close_process();
  }
}

void BridgeSession::close_process() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
}

void BridgeSession::fail_protocol(const std::string& what) {
  close_process();
  throw BridgeProtocolError(what);
}

void BridgeSession::write_line(std::string_view line) {
  if (!is_open()) throw BridgeProtocolError("bridge session is closed");
  std::string payload(line);
  payload.push_back('\n');
  std::size_t written = 0;
  while (written < payload.size()) {
    const ssize_t n = ::write(to_child_, payload.data() + written, payload.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_protocol("write to bridge server failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string BridgeSession::read_line() {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + options_.timeout;
  for (;;) {
    if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (remaining <= 0) {
      close_process();
      throw BridgeTimeout("bridge server did not respond within " +
                          std::to_string(options_.timeout.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail_protocol("poll on bridge server failed");
    }
    if (ready == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      fail_protocol("read from bridge server failed");
    }
    if (n == 0) fail_protocol("bridge server closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string BridgeSession::exchange_raw(std::string_view line) {
  write_line(line);
  return read_line();
}

nlohmann::json BridgeSession::request(nlohmann::json message) {
  const std::int64_t id = next_id_++;
  message["id"] = id;
  write_line(message.dump());
  const std::string line = read_line();

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    fail_protocol("malformed response line: " + line.substr(0, 200));
  }
  if (!response.is_object()) fail_protocol("response is not a JSON object");
  const auto id_it = response.find("id");
  if (id_it == response.end() || !id_it->is_number_integer() || id_it->get<std::int64_t>() != id) {
    fail_protocol("response id does not match request id " + std::to_string(id));
  }
  const auto ok_it = response.find("ok");
  if (ok_it == response.end() || !ok_it->is_boolean()) fail_protocol("response lacks boolean 'ok'");
  if (!ok_it->get<bool>()) {
    const auto code = response.find("code");
    const auto msg = response.find("message");
    if (code == response.end() || !code->is_string()) fail_protocol("error response lacks 'code'");
    throw BridgeRemoteError(code->get<std::string>(),
                            msg != response.end() && msg->is_string() ? msg->get<std::string>() : "");
  }
  return response;
}

std::size_t BridgeSession::init(std::span<const Sample> data) {
  auto features = nlohmann::json::array();
  auto targets = nlohmann::json::array();
  for (const auto& s : data) {
    features.push_back(vector_json(s.x));
    targets.push_back(s.y);
  }
  const auto response =
      request({{"op", "init"}, {"features", std::move(features)}, {"targets", std::move(targets)}});
  const auto n = response.find("n");
  if (n == response.end() || !n->is_number_integer()) fail_protocol("init response lacks 'n'");
  if (n->get<std::int64_t>() != static_cast<std::int64_t>(data.size())) {
    fail_protocol("init response reports a different dataset size");
  }
  uploaded_ = data.size();
  return uploaded_;
}

RemotePrediction BridgeSession::predict(const Vector& query, std::size_t prefix_len) {
  const auto response = request(
      {{"op", "predict"}, {"query", vector_json(query)}, {"prefix_len", prefix_len}});
  RemotePrediction out;
  try {
    const auto& mean = response.at("mean");
    if (!mean.is_number()) throw BridgeProtocolError("'mean' is not a number");
    out.mean = mean.get<double>();
    const auto& bins = response.at("bins");
    out.dist.midpoints = to_doubles(bins.at("midpoints"), "midpoints");
    out.dist.widths = to_doubles(bins.at("widths"), "widths");
    out.dist.probs = to_doubles(bins.at("probs"), "probs");
    out.dist.validate();
  } catch (const nlohmann::json::exception& e) {
    fail_protocol(std::string("predict response missing fields: ") + e.what());
  } catch (const DistributionError& e) {
    fail_protocol(std::string("invalid bins in predict response: ") + e.what());
  } catch (const BridgeProtocolError& e) {
    fail_protocol(e.what());
  }
  if (!std::isfinite(out.mean) || std::abs(out.mean - out.dist.mean()) > 1e-6) {
    fail_protocol("predictive mean disagrees with the declared bins");
  }
  return out;
}

void BridgeSession::shutdown() {
  if (!is_open()) return;
  request({{"op", "shutdown"}});
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  int status = 0;
  ::waitpid(pid_, &status, 0);
  ::close(from_child_);
  from_child_ = -1;
  pid_ = -1;
}

RemotePrediction remote_predict(BridgeSession& session, const Vector& query, std::size_t prefix_len) {
  return session.predict(query, prefix_len);
}

namespace {

class RemoteState final : public SnapshotState {
 public:
  RemoteState(RemoteModel* owner, std::size_t prefix) : owner_(owner), prefix_(prefix) {}

  double predict_mean(const Vector& query) const override { return owner_->remote(query, prefix_).mean; }
  PredictiveDistribution predict_dist(const Vector& query) const override {
    return owner_->remote(query, prefix_).dist;
  }

 private:
  RemoteModel* owner_;
  std::size_t prefix_;
};

}  // namespace

RemoteModel::RemoteModel(std::size_t dim, BridgeOptions options)
    : dim_(dim), options_(std::move(options)) {}

RemotePrediction RemoteModel::remote(const Vector& query, std::size_t prefix) {
  if (!session_ || !session_->is_open() || session_->uploaded() < prefix) {
    session_.reset();
    session_ = std::make_unique<BridgeSession>(options_);
    ++launches_;
    session_->init(rows());
  }
  return session_->predict(query, prefix);
}

std::shared_ptr<const SnapshotState> RemoteModel::build_state(std::size_t prefix, const SnapshotState*,
                                                              std::size_t) {
  return std::make_shared<RemoteState>(this, prefix);
}

}  // namespace pfnts
