#pragma once

#include "gazepair/adversary.hpp"
#include "gazepair/analysis.hpp"
#include "gazepair/crypto.hpp"
#include "gazepair/eventlog.hpp"
#include "gazepair/gaze.hpp"
#include "gazepair/geometry.hpp"
#include "gazepair/hygiene.hpp"
#include "gazepair/ksc.hpp"
#include "gazepair/protocol.hpp"
#include "gazepair/rng.hpp"
#include "gazepair/session.hpp"
#include "gazepair/transport.hpp"
#include "gazepair/wire.hpp"
