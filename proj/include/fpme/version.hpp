// Copyright (c) 2026 The FPME Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace fpme {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fpme
