#pragma once

#include "commscore/caching_provider.hpp"
#include "commscore/duplicate_scorer.hpp"
#include "commscore/embedding.hpp"
#include "commscore/error.hpp"
#include "commscore/evaluation.hpp"
#include "commscore/mock_provider.hpp"
#include "commscore/parasite_scorer.hpp"
#include "commscore/plot.hpp"
#include "commscore/report.hpp"
#include "commscore/sidecar_client.hpp"
#include "commscore/transcript.hpp"
