#pragma once

#include "lsc/corpus.hpp"
#include "lsc/decide.hpp"
#include "lsc/embed.hpp"
#include "lsc/error.hpp"
#include "lsc/evaluate.hpp"
#include "lsc/posdist.hpp"
#include "lsc/secondorder.hpp"
#include "lsc/synth.hpp"
