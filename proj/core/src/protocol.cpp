#include "qcut/protocol.hpp"

#include <json.hpp>

#include "qcut/error.hpp"
#include "qcut/qasm.hpp"

#ifdef QCUT_SOCKET_TRANSPORT
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#endif

namespace qcut {

using nlohmann::json;

std::string encode_request(const EvalRequest& request) {
  json frame;
  frame["type"] = "eval";
  frame["job_id"] = request.job_id;
  frame["circuit"] = {{"qasm", emit_qasm(request.circuit)}};
  frame["observable"] = request.circuit.observable.paulis;
  frame["shots"] = request.shots;
  frame["seed"] = request.seed;
  return frame.dump();
}

namespace {

json parse_frame(const std::string& frame) {
  json parsed = json::parse(frame, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded())
    fail(ErrorKind::Parse, "malformed protocol frame");
  if (!parsed.is_object() || !parsed.contains("type") ||
      !parsed["type"].is_string())
    fail(ErrorKind::Parse, "protocol frame missing type");
  return parsed;
}

}  // namespace

EvalRequest decode_request(const std::string& frame) {
  const json parsed = parse_frame(frame);
  if (parsed["type"] != "eval")
    fail(ErrorKind::Parse, "expected an eval frame");
  try {
    EvalRequest request;
    request.job_id = parsed.at("job_id").get<std::string>();
    request.circuit =
        parse_qasm_subset(parsed.at("circuit").at("qasm").get<std::string>());
    request.circuit.observable =
        Observable{parsed.at("observable").get<std::string>()};
    request.shots = parsed.at("shots").get<std::uint64_t>();
    request.seed = parsed.at("seed").get<std::uint64_t>();
    validate(request.circuit);
    return request;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad eval frame: ") + e.what());
  }
}

std::string encode_result(const std::string& job_id, double value) {
  json frame;
  frame["type"] = "result";
  frame["job_id"] = job_id;
  frame["value"] = value;
  return frame.dump();
}

std::string encode_error(const std::string& job_id,
                         const std::string& message) {
  json frame;
  frame["type"] = "error";
  frame["job_id"] = job_id;
  frame["message"] = message;
  return frame.dump();
}

WireResponse decode_response(const std::string& frame) {
  const json parsed = parse_frame(frame);
  try {
    WireResponse response;
    response.job_id = parsed.at("job_id").get<std::string>();
    if (parsed["type"] == "result") {
      response.ok = true;
      response.value = parsed.at("value").get<double>();
    } else if (parsed["type"] == "error") {
      response.ok = false;
      response.message = parsed.at("message").get<std::string>();
    } else {
      fail(ErrorKind::Parse, "unexpected response frame type");
    }
    return response;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("bad response frame: ") + e.what());
  }
}

std::string handle_frame(const std::string& frame, Executor& executor) {
  std::string job_id = "?";
  try {
    const EvalRequest request = decode_request(frame);
    job_id = request.job_id;
    return encode_result(job_id, executor.evaluate(request));
  } catch (const std::exception& e) {
    return encode_error(job_id, e.what());
  }
}

#ifdef QCUT_SOCKET_TRANSPORT

namespace {

void write_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::write(fd, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::Io, std::string("socket write: ") + std::strerror(errno));
    }
    sent += std::size_t(n);
  }
}

// Reads until a newline is buffered; returns false on orderly EOF with an
// empty buffer.
bool read_line(int fd, std::string& buffer, std::string& line) {
  for (;;) {
    const auto pos = buffer.find('\n');
    if (pos != std::string::npos) {
      line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorKind::Io, std::string("socket read: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (buffer.empty()) return false;
      line = std::move(buffer);
      buffer.clear();
      return true;
    }
    buffer.append(chunk, std::size_t(n));
  }
}

sockaddr_un socket_address(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path)
    fail(ErrorKind::InvalidArgument, "socket path too long: " + path);
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

}  // namespace

void serve_worker(const std::string& socket_path, Executor& executor,
                  std::size_t max_connections) {
  const int listener = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (listener < 0)
    fail(ErrorKind::Io, std::string("socket: ") + std::strerror(errno));
  ::unlink(socket_path.c_str());
  sockaddr_un addr = socket_address(socket_path);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(listener);
    fail(ErrorKind::Io, "bind " + socket_path + ": " + std::strerror(err));
  }
  if (::listen(listener, 4) != 0) {
    const int err = errno;
    ::close(listener);
    fail(ErrorKind::Io, std::string("listen: ") + std::strerror(err));
  }

  for (std::size_t served = 0; served < max_connections; ++served) {
    const int conn = ::accept(listener, nullptr, nullptr);
    if (conn < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(listener);
      fail(ErrorKind::Io, std::string("accept: ") + std::strerror(err));
    }
    std::string buffer;
    std::string line;
    try {
      while (read_line(conn, buffer, line)) {
        if (line.empty()) continue;
        write_all(conn, handle_frame(line, executor) + "\n");
      }
    } catch (const Error&) {
      // A torn connection ends this client, not the worker.
    }
    ::close(conn);
  }
  ::close(listener);
  ::unlink(socket_path.c_str());
}

SocketExecutor::SocketExecutor(std::string id, std::string socket_path)
    : id_(std::move(id)), socket_path_(std::move(socket_path)) {}

SocketExecutor::~SocketExecutor() {
  if (fd_ >= 0) ::close(fd_);
}

void SocketExecutor::connect_once() {
  if (fd_ >= 0) return;
  const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0)
    fail(ErrorKind::Io, std::string("socket: ") + std::strerror(errno));
  sockaddr_un addr = socket_address(socket_path_);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd);
    fail(ErrorKind::Io,
         "connect " + socket_path_ + ": " + std::strerror(err));
  }
  fd_ = fd;
}

std::string SocketExecutor::roundtrip(const std::string& frame) {
  connect_once();
  write_all(fd_, frame + "\n");
  std::string line;
  if (!read_line(fd_, buffer_, line))
    fail(ErrorKind::Job, "worker " + id_ + " closed the connection");
  return line;
}

double SocketExecutor::evaluate(const EvalRequest& request) {
  const WireResponse response = decode_response(roundtrip(encode_request(request)));
  if (!response.ok)
    fail(ErrorKind::Job, "worker " + id_ + ": " + response.message);
  if (response.job_id != request.job_id)
    fail(ErrorKind::Job, "worker " + id_ + " answered the wrong job");
  return response.value;
}

Counts SocketExecutor::sample_counts(const EvalRequest&) {
  fail(ErrorKind::Job,
       "the socket transport only carries expectation values");
}

#endif  // QCUT_SOCKET_TRANSPORT

}  // namespace qcut
