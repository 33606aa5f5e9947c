#pragma once

#include "onf/canonical.hpp"
#include "onf/givens.hpp"
#include "onf/hoon.hpp"
#include "onf/implicit.hpp"
#include "onf/model_io.hpp"
#include "onf/normal_form.hpp"
#include "onf/orp.hpp"
#include "onf/otson.hpp"
#include "onf/pair.hpp"
#include "onf/schur.hpp"
#include "onf/stein.hpp"
#include "onf/types.hpp"
