#pragma once

// Umbrella header: nonconforming and mixed triangular finite elements with
// superconvergent midpoint recovery, plus the mesh tooling and convergence
// study drivers around them.

#include "scfem/assembly.hpp"
#include "scfem/convergence.hpp"
#include "scfem/diagnostics.hpp"
#include "scfem/dofmap.hpp"
#include "scfem/elements.hpp"
#include "scfem/interpolation.hpp"
#include "scfem/mesh.hpp"
#include "scfem/polynomial.hpp"
#include "scfem/postprocess.hpp"
#include "scfem/problems.hpp"
#include "scfem/quadrature.hpp"
#include "scfem/types.hpp"
