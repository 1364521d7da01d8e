#pragma once

// Core library: everything except the HTTP service (include makeup/service.hpp for that).

#include "makeup/align.hpp"
#include "makeup/config_io.hpp"
#include "makeup/error.hpp"
#include "makeup/field.hpp"
#include "makeup/image.hpp"
#include "makeup/image_io.hpp"
#include "makeup/labels.hpp"
#include "makeup/layers.hpp"
#include "makeup/masks.hpp"
#include "makeup/pipeline.hpp"
#include "makeup/preprocess.hpp"
#include "makeup/synth.hpp"
#include "makeup/transfer.hpp"
