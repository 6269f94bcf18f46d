// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#pragma once

#include <stdexcept>
#include <string>

namespace splitpriv {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

struct SizeError : std::runtime_error {
  explicit SizeError(const std::string& what) : std::runtime_error(what) {}
};

struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what, int retries = 0) : std::runtime_error(what), retry_count(retries) {}
  int retry_count = 0;
};

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace splitpriv
