// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Edge<->cloud transport. Wire format (all integers little-endian):
//
//   magic    4B  "PHT1"
//   version  u8  (1)
//   msg_type u8  0=features 1=labels 2=gradient 3=control
//   epoch    u32
//   batch_id u32
//   dtype    u8  (0 = f32; other values reserved)
//   rank     u8
//   dims     rank x u32
//   payload  row-major f32, 4 * prod(dims) bytes
//   crc32    u32 over the payload bytes
//
// The same codec backs both the in-process loopback pair and the TCP socket
// transport, so the two have identical semantics: ordered, reliable,
// at-most-once delivery per connection.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "splitpriv/errors.hpp"
#include "splitpriv/tensor.hpp"

namespace splitpriv {

enum class MsgType : uint8_t { Features = 0, Labels = 1, Gradient = 2, Control = 3 };

struct Frame {
  MsgType type = MsgType::Features;
  uint32_t epoch = 0;
  uint32_t batch_id = 0;
  Shape dims;
  std::vector<float> payload;

  static Frame tensor(MsgType t, uint32_t epoch, uint32_t batch, const TensorF& x) {
    Frame f;
    f.type = t;
    f.epoch = epoch;
    f.batch_id = batch;
    f.dims = x.shape;
    f.payload = x.data;
    return f;
  }

  TensorF to_tensor() const { return TensorF(dims, payload); }
};

enum class FrameErrorCode { BadMagic, BadVersion, BadType, BadDtype, Truncated, BadCrc, BadDims };

struct FrameError : ProtocolError {
  FrameErrorCode code;
  FrameError(FrameErrorCode c, const std::string& what) : ProtocolError(what), code(c) {}
};

std::vector<uint8_t> encode(const Frame& f);
Frame decode(const std::vector<uint8_t>& bytes);

/// One end of a duplex frame connection.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const Frame& f) = 0;
  virtual Frame recv() = 0;  // blocks up to the timeout; throws TransportError
  virtual void close() = 0;
};

/// In-process pair with the same ordered at-most-once semantics as a socket.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> loopback_transport(double timeout_s = 30.0);

/// Listening (cloud) side of the TCP transport. port 0 binds an ephemeral
/// port, readable via port() before accept().
class SocketServer {
 public:
  SocketServer(const std::string& host, int port);
  ~SocketServer();
  SocketServer(const SocketServer&) = delete;
  SocketServer& operator=(const SocketServer&) = delete;

  int port() const { return port_; }
  std::unique_ptr<Transport> accept(double timeout_s = 30.0);
  void close_listener();

 private:
  int fd_ = -1;
  int port_ = 0;
};

/// Connecting (edge) side; retries the connect for up to `retries` attempts.
std::unique_ptr<Transport> socket_connect(const std::string& host, int port, double timeout_s = 30.0,
                                          int retries = 20);

/// Test instrumentation: records a copy of every frame crossing the wrapped
/// transport.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(std::unique_ptr<Transport> inner) : inner_(std::move(inner)) {}
  void send(const Frame& f) override {
    sent.push_back(f);
    inner_->send(f);
  }
  Frame recv() override {
    Frame f = inner_->recv();
    received.push_back(f);
    return f;
  }
  void close() override { inner_->close(); }

  std::vector<Frame> sent;
  std::vector<Frame> received;

 private:
  std::unique_ptr<Transport> inner_;
};

}  // namespace splitpriv
