#pragma once

#include "pake/bigint.hpp"
#include "pake/constants.hpp"
#include "pake/crypto.hpp"
#include "pake/error.hpp"
#include "pake/group.hpp"
#include "pake/handshake.hpp"
#include "pake/negotiate.hpp"
#include "pake/params_file.hpp"
#include "pake/protocol.hpp"
#include "pake/random.hpp"
#include "pake/wire.hpp"
