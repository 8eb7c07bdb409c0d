// Copyright (C) 2026 The dragkit Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Everything except the HTTP service (dragkit/service.hpp), which pulls in
// cpp-httplib.

#include "dragkit/attention.hpp"
#include "dragkit/bundle.hpp"
#include "dragkit/cti.hpp"
#include "dragkit/error.hpp"
#include "dragkit/formats/dkf.hpp"
#include "dragkit/formats/drag_spec.hpp"
#include "dragkit/formats/image.hpp"
#include "dragkit/formats/json_io.hpp"
#include "dragkit/formats/render.hpp"
#include "dragkit/geometry.hpp"
#include "dragkit/harness.hpp"
#include "dragkit/hull.hpp"
#include "dragkit/lrm.hpp"
#include "dragkit/oracle.hpp"
#include "dragkit/rope.hpp"
