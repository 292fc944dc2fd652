#pragma once

// Umbrella header for the whole library.

#include "collage/core.hpp"
#include "collage/color.hpp"
#include "collage/importance.hpp"
#include "collage/geometry.hpp"
#include "collage/scene.hpp"
#include "collage/criteria.hpp"
#include "collage/optimizer.hpp"
#include "collage/preference.hpp"
#include "collage/learning.hpp"
#include "collage/io.hpp"
#include "collage/dataset.hpp"
#include "collage/serialization.hpp"
#include "collage/workspace.hpp"
#include "collage/commands.hpp"
#include "collage/service.hpp"
