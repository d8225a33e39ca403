#pragma once

#include "potts/field.hpp"
#include "potts/freetree.hpp"
#include "potts/homogeneous.hpp"
#include "potts/model.hpp"
#include "potts/sampler.hpp"
#include "potts/uniqueness.hpp"
