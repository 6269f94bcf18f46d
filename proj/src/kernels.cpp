// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/kernels.hpp"

#include <atomic>

namespace splitpriv::kern {

namespace {
std::atomic<Backend> g_backend{Backend::Parallel};
}

Backend backend() { return g_backend.load(std::memory_order_relaxed); }
void set_backend(Backend b) { g_backend.store(b, std::memory_order_relaxed); }

}  // namespace splitpriv::kern
