#pragma once

#include "qdeform/errors.hpp"
#include "qdeform/deformation.hpp"
#include "qdeform/qcore.hpp"
#include "qdeform/exact.hpp"
#include "qdeform/lattice.hpp"
#include "qdeform/paired_state.hpp"
#include "qdeform/spectral.hpp"
#include "qdeform/hilbert.hpp"
#include "qdeform/schrodinger.hpp"
#include "qdeform/dynamics.hpp"
#include "qdeform/verification.hpp"
