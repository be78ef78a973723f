#pragma once

#include <cstddef>
#include <string>

#include "qcut/broker.hpp"

namespace qcut {

// Newline-delimited JSON frames between the broker and a worker.
//
// Request:  {"type":"eval","job_id":s,"circuit":{"qasm":s},"observable":s,
//            "shots":n,"seed":n}
// Response: {"type":"result","job_id":s,"value":x}
//        or {"type":"error","job_id":s,"message":s}
//
// The circuit travels as QASM-subset text; the observable rides alongside it
// because the wire format has no measurement syntax. Encoded frames carry no
// trailing newline — the transport adds the delimiter.

std::string encode_request(const EvalRequest& request);
EvalRequest decode_request(const std::string& frame);

std::string encode_result(const std::string& job_id, double value);
std::string encode_error(const std::string& job_id, const std::string& message);

struct WireResponse {
  bool ok = false;
  std::string job_id;
  double value = 0.0;
  std::string message;  // set when !ok
};

WireResponse decode_response(const std::string& frame);

// Serve one request through the frame codec without any socket: decode,
// evaluate, encode. This is the transport-independent core of a worker and
// the contract loopback tests exercise.
std::string handle_frame(const std::string& frame, Executor& executor);

#ifdef QCUT_SOCKET_TRANSPORT

// Blocking worker loop on a Unix domain socket. Accepts connections one at a
// time and answers each newline-delimited request frame in order; returns
// after `max_connections` connections have disconnected.
void serve_worker(const std::string& socket_path, Executor& executor,
                  std::size_t max_connections = std::size_t(-1));

// Broker-side proxy for a worker reachable over a Unix domain socket.
class SocketExecutor : public Executor {
 public:
  SocketExecutor(std::string id, std::string socket_path);
  ~SocketExecutor() override;

  SocketExecutor(const SocketExecutor&) = delete;
  SocketExecutor& operator=(const SocketExecutor&) = delete;

  const std::string& id() const override { return id_; }
  double evaluate(const EvalRequest& request) override;
  // The wire contract only carries expectation values.
  Counts sample_counts(const EvalRequest& request) override;

 private:
  void connect_once();
  std::string roundtrip(const std::string& frame);

  std::string id_;
  std::string socket_path_;
  int fd_ = -1;
  std::string buffer_;
};

#endif  // QCUT_SOCKET_TRANSPORT

}  // namespace qcut
