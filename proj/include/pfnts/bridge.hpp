#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pfnts/predictive_model.hpp"

namespace pfnts {

struct BridgeOptions {
  // argv of the server process; argv[0] is resolved through PATH.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{60'000};
};

struct RemotePrediction {
  double mean = 0.0;
  BinnedPmf dist;
};

// One server process speaking newline-delimited JSON over stdin/stdout:
//
//   {"id":1,"op":"init","features":[[...],...],"targets":[...]}  -> {"id":1,"ok":true,"n":N}
//   {"id":2,"op":"predict","query":[...],"prefix_len":i}
//       -> {"id":2,"ok":true,"mean":m,"bins":{"midpoints":[...],"widths":[...],"probs":[...]}}
//   {"id":3,"op":"shutdown"}                                       -> {"id":3,"ok":true}
//   any failure -> {"id":k,"ok":false,"code":"...","message":"..."}
//
// Requests are strictly sequential. A malformed or mismatched response closes
// the session and raises BridgeProtocolError; an error response raises
// BridgeRemoteError and leaves the session usable.
class BridgeSession {
 public:
  explicit BridgeSession(BridgeOptions options);
  ~BridgeSession();

  BridgeSession(const BridgeSession&) = delete;
  BridgeSession& operator=(const BridgeSession&) = delete;

  std::size_t init(std::span<const Sample> data);
  RemotePrediction predict(const Vector& query, std::size_t prefix_len);
  void shutdown();

  bool is_open() const noexcept { return pid_ > 0; }
  std::size_t uploaded() const noexcept { return uploaded_; }

  // Sends `message` with a fresh id and returns the validated response object.
  nlohmann::json request(nlohmann::json message);
  // Writes a raw line and reads one response line; no validation.
  std::string exchange_raw(std::string_view line);

 private:
  void write_line(std::string_view line);
  std::string read_line();
  [[noreturn]] void fail_protocol(const std::string& what);
  void close_process();

  BridgeOptions options_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::int64_t next_id_ = 1;
  std::size_t uploaded_ = 0;
};

RemotePrediction remote_predict(BridgeSession& session, const Vector& query, std::size_t prefix_len);

// PredictiveModel backed by a bridge server. The protocol allows one upload per
// session, so the model relaunches the server with the full history whenever
// a prediction needs a prefix beyond what was uploaded.
class RemoteModel final : public PredictiveModel {
 public:
  RemoteModel(std::size_t dim, BridgeOptions options);

  std::size_t dim() const override { return dim_; }
  RemotePrediction remote(const Vector& query, std::size_t prefix);
  std::size_t session_launches() const noexcept { return launches_; }

 protected:
  std::shared_ptr<const SnapshotState> build_state(std::size_t prefix, const SnapshotState* base,
                                                   std::size_t base_prefix) override;

 private:
  std::size_t dim_;
  BridgeOptions options_;
  std::unique_ptr<BridgeSession> session_;
  std::size_t launches_ = 0;
};

}  // namespace pfnts
