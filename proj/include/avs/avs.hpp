// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "avs/attention.hpp"
#include "avs/binary_io.hpp"
#include "avs/checkpoint.hpp"
#include "avs/dataset.hpp"
#include "avs/decoder.hpp"
#include "avs/error.hpp"
#include "avs/export.hpp"
#include "avs/lstm.hpp"
#include "avs/matrix.hpp"
#include "avs/model.hpp"
#include "avs/pipeline.hpp"
#include "avs/segmentation.hpp"
#include "avs/selection.hpp"
#include "avs/synthetic.hpp"
#include "avs/tape.hpp"
#include "avs/training.hpp"
