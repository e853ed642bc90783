#pragma once

// Convenience umbrella: the full simulation, certification, and
// verification pipeline in one include.

#include <mlstab/assumption_checker.hpp>
#include <mlstab/io.hpp>
#include <mlstab/solver.hpp>
#include <mlstab/special_functions.hpp>
#include <mlstab/stability_certificate.hpp>
#include <mlstab/svg_plot.hpp>
#include <mlstab/system_model.hpp>
#include <mlstab/verifier.hpp>
