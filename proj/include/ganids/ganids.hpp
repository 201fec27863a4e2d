#pragma once

#include "ganids/config.hpp"
#include "ganids/dataio.hpp"
#include "ganids/demo.hpp"
#include "ganids/error.hpp"
#include "ganids/forest.hpp"
#include "ganids/gan.hpp"
#include "ganids/harness.hpp"
#include "ganids/matrix.hpp"
#include "ganids/neuralnet.hpp"
#include "ganids/preprocess.hpp"
#include "ganids/rng.hpp"
#include "ganids/segment.hpp"
#include "ganids/similarity.hpp"
