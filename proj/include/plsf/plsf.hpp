#ifndef PLSF_PLSF_HPP
#define PLSF_PLSF_HPP

#include "plsf/error.hpp"
#include "plsf/grid.hpp"
#include "plsf/field.hpp"
#include "plsf/operators.hpp"
#include "plsf/basis.hpp"
#include "plsf/point_tensor.hpp"
#include "plsf/constitutive.hpp"
#include "plsf/galerkin.hpp"
#include "plsf/initial_data.hpp"
#include "plsf/integrator.hpp"
#include "plsf/trajectory.hpp"
#include "plsf/checkpoint.hpp"
#include "plsf/exponents.hpp"
#include "plsf/gap.hpp"
#include "plsf/inequality_lab.hpp"
#include "plsf/config.hpp"
#include "plsf/study.hpp"
#include "plsf/cli.hpp"

#endif  // PLSF_PLSF_HPP
