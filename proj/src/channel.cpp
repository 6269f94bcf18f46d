// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/channel.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>
#include <zlib.h>

#include <bit>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

namespace splitpriv {

namespace {

constexpr uint8_t kMagic[4] = {'P', 'H', 'T', '1'};
constexpr uint8_t kVersion = 1;
constexpr uint8_t kDtypeF32 = 0;
constexpr size_t kPrefixLen = 16;  // magic..rank inclusive
constexpr int64_t kMaxRank = 8;
constexpr int64_t kMaxPayloadBytes = int64_t(1) << 30;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
}

uint32_t get_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 | static_cast<uint32_t>(p[2]) << 16 |
         static_cast<uint32_t>(p[3]) << 24;
}

uint32_t payload_crc(const std::vector<float>& payload) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size() * 4)));
}

}  // namespace

std::vector<uint8_t> encode(const Frame& f) {
  if (f.dims.size() > static_cast<size_t>(kMaxRank)) throw FrameError(FrameErrorCode::BadDims, "encode: rank too large");
  int64_t n = 1;
  for (int64_t d : f.dims) {
    if (d < 0 || d > 0xffffffffLL) throw FrameError(FrameErrorCode::BadDims, "encode: dim out of range");
    n *= d;
  }
  if (n != static_cast<int64_t>(f.payload.size()))
    throw FrameError(FrameErrorCode::BadDims, "encode: payload does not match dims");
  if (static_cast<uint8_t>(f.type) > 3) throw FrameError(FrameErrorCode::BadType, "encode: unknown msg_type");

  std::vector<uint8_t> out;
  out.reserve(kPrefixLen + 4 * f.dims.size() + 4 * f.payload.size() + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  out.push_back(static_cast<uint8_t>(f.type));
  put_u32(out, f.epoch);
  put_u32(out, f.batch_id);
  out.push_back(kDtypeF32);
  out.push_back(static_cast<uint8_t>(f.dims.size()));
  for (int64_t d : f.dims) put_u32(out, static_cast<uint32_t>(d));
  const size_t payload_at = out.size();
  out.resize(payload_at + f.payload.size() * 4);
  static_assert(std::endian::native == std::endian::little, "payload serialization assumes little-endian floats");
  std::memcpy(out.data() + payload_at, f.payload.data(), f.payload.size() * 4);
  put_u32(out, payload_crc(f.payload));
  return out;
}

Frame decode(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < kPrefixLen) throw FrameError(FrameErrorCode::Truncated, "decode: short prefix");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FrameError(FrameErrorCode::BadMagic, "decode: bad magic");
  if (bytes[4] != kVersion) throw FrameError(FrameErrorCode::BadVersion, "decode: unsupported version");
  const uint8_t type = bytes[5];
  if (type > 3) throw FrameError(FrameErrorCode::BadType, "decode: unknown msg_type");
  const uint8_t dtype = bytes[14];
  if (dtype != kDtypeF32) throw FrameError(FrameErrorCode::BadDtype, "decode: unsupported dtype");
  const uint8_t rank = bytes[15];
  if (rank > kMaxRank) throw FrameError(FrameErrorCode::BadDims, "decode: rank too large");
  if (bytes.size() < kPrefixLen + 4u * rank) throw FrameError(FrameErrorCode::Truncated, "decode: short dims");

  Frame f;
  f.type = static_cast<MsgType>(type);
  f.epoch = get_u32(bytes.data() + 6);
  f.batch_id = get_u32(bytes.data() + 10);
  int64_t n = 1;
  for (int i = 0; i < rank; ++i) {
    const auto d = static_cast<int64_t>(get_u32(bytes.data() + kPrefixLen + 4 * static_cast<size_t>(i)));
    f.dims.push_back(d);
    n *= d;
  }
  if (n * 4 > kMaxPayloadBytes) throw FrameError(FrameErrorCode::BadDims, "decode: payload too large");
  const size_t payload_at = kPrefixLen + 4u * rank;
  if (bytes.size() != payload_at + static_cast<size_t>(n) * 4 + 4)
    throw FrameError(FrameErrorCode::Truncated, "decode: length mismatch");
  f.payload.resize(static_cast<size_t>(n));
  std::memcpy(f.payload.data(), bytes.data() + payload_at, static_cast<size_t>(n) * 4);
  const uint32_t want = get_u32(bytes.data() + payload_at + static_cast<size_t>(n) * 4);
  if (want != payload_crc(f.payload)) throw FrameError(FrameErrorCode::BadCrc, "decode: payload crc mismatch");
  return f;
}

// ---------------------------------------------------------------------------
// loopback

namespace {

struct LoopbackShared {
  std::mutex m;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> q[2];
  bool closed[2] = {false, false};
};

class LoopbackTransport : public Transport {
 public:
  LoopbackTransport(std::shared_ptr<LoopbackShared> sh, int idx, double timeout_s)
      : sh_(std::move(sh)), idx_(idx), timeout_(timeout_s) {}

  ~LoopbackTransport() override { close(); }

  void send(const Frame& f) override {
    auto bytes = encode(f);
    std::lock_guard<std::mutex> lk(sh_->m);
    if (sh_->closed[1 - idx_]) throw TransportError("loopback: peer closed");
    sh_->q[1 - idx_].push_back(std::move(bytes));
    sh_->cv.notify_all();
  }

  Frame recv() override {
    std::unique_lock<std::mutex> lk(sh_->m);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_);
    while (sh_->q[idx_].empty()) {
      if (sh_->closed[1 - idx_]) throw TransportError("loopback: peer closed");
      if (sh_->cv.wait_until(lk, deadline) == std::cv_status::timeout)
        throw TransportError("loopback: recv timeout");
    }
    auto bytes = std::move(sh_->q[idx_].front());
    sh_->q[idx_].pop_front();
    lk.unlock();
    return decode(bytes);
  }

  void close() override {
    std::lock_guard<std::mutex> lk(sh_->m);
    sh_->closed[idx_] = true;
    sh_->cv.notify_all();
  }

 private:
  std::shared_ptr<LoopbackShared> sh_;
  int idx_;
  double timeout_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> loopback_transport(double timeout_s) {
  auto sh = std::make_shared<LoopbackShared>();
  return {std::make_unique<LoopbackTransport>(sh, 0, timeout_s), std::make_unique<LoopbackTransport>(sh, 1, timeout_s)};
}

// ---------------------------------------------------------------------------
// sockets

namespace {

void set_recv_timeout(int fd, double timeout_s) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout_s);
  tv.tv_usec = static_cast<suseconds_t>((timeout_s - static_cast<double>(tv.tv_sec)) * 1e6);
  setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

class SocketTransport : public Transport {
 public:
  SocketTransport(int fd, double timeout_s) : fd_(fd) {
    set_recv_timeout(fd_, timeout_s);
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }

  ~SocketTransport() override { close(); }

  void send(const Frame& f) override {
    auto bytes = encode(f);
    size_t off = 0;
    while (off < bytes.size()) {
      const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw TransportError("socket: send failed (" + std::string(std::strerror(errno)) + ")");
      off += static_cast<size_t>(n);
    }
  }

  Frame recv() override {
    std::vector<uint8_t> buf(kPrefixLen);
    recv_exact(buf.data(), kPrefixLen);
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw FrameError(FrameErrorCode::BadMagic, "socket: bad magic");
    const uint8_t rank = buf[15];
    if (rank > kMaxRank) throw FrameError(FrameErrorCode::BadDims, "socket: rank too large");
    const size_t dims_at = buf.size();
    buf.resize(dims_at + 4u * rank);
    recv_exact(buf.data() + dims_at, 4u * rank);
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) n *= static_cast<int64_t>(get_u32(buf.data() + dims_at + 4 * static_cast<size_t>(i)));
    if (n < 0 || n * 4 > kMaxPayloadBytes) throw FrameError(FrameErrorCode::BadDims, "socket: payload too large");
    const size_t body_at = buf.size();
    buf.resize(body_at + static_cast<size_t>(n) * 4 + 4);
    recv_exact(buf.data() + body_at, static_cast<size_t>(n) * 4 + 4);
    return decode(buf);
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  void recv_exact(uint8_t* dst, size_t len) {
    size_t off = 0;
    while (off < len) {
      const ssize_t n = ::recv(fd_, dst + off, len - off, 0);
      if (n == 0) throw TransportError("socket: connection closed by peer");
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("socket: recv timeout");
        throw TransportError("socket: recv failed (" + std::string(std::strerror(errno)) + ")");
      }
      off += static_cast<size_t>(n);
    }
  }

  int fd_;
};

}  // namespace

SocketServer::SocketServer(const std::string& host, int port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError("socket server: cannot create socket");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("socket server: bad host " + host);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
    throw TransportError("socket server: bind failed on " + host + ":" + std::to_string(port));
  if (::listen(fd_, 1) != 0) throw TransportError("socket server: listen failed");
  sockaddr_in actual{};
  socklen_t alen = sizeof(actual);
  getsockname(fd_, reinterpret_cast<sockaddr*>(&actual), &alen);
  port_ = ntohs(actual.sin_port);
}

SocketServer::~SocketServer() { close_listener(); }

void SocketServer::close_listener() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Transport> SocketServer::accept(double timeout_s) {
  pollfd pfd{fd_, POLLIN, 0};
  const int r = ::poll(&pfd, 1, static_cast<int>(timeout_s * 1000));
  if (r <= 0) throw TransportError("socket server: accept timeout");
  const int client = ::accept(fd_, nullptr, nullptr);
  if (client < 0) throw TransportError("socket server: accept failed");
  return std::make_unique<SocketTransport>(client, timeout_s);
}

std::unique_ptr<Transport> socket_connect(const std::string& host, int port, double timeout_s, int retries) {
  int attempt = 0;
  while (true) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket: cannot create socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw TransportError("socket: bad host " + host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0)
      return std::make_unique<SocketTransport>(fd, timeout_s);
    ::close(fd);
    if (++attempt >= retries)
      throw TransportError("socket: connect to " + host + ":" + std::to_string(port) + " failed", attempt);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace splitpriv
