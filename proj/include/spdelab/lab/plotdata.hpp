#pragma once

#include <string>

#include "spdelab/lab/runner.hpp"

namespace spdelab::lab {

/// Long-format `series,x,y,y_err`. Throws MissingSeries when a series the experiment
/// promises is absent.
std::string emit_plotdata(const ReportBundle& bundle);

}  // namespace spdelab::lab
