#include "spdelab/lab/plotdata.hpp"

#include <sstream>

#include "spdelab/csv.hpp"

namespace spdelab::lab {

std::string emit_plotdata(const ReportBundle& bundle) {
    for (const auto& name : bundle.required_series)
        if (!bundle.find_series(name))
            throw Error(ErrorKind::MissingSeries, "report has no series '" + name + "'");
    std::ostringstream out;
    CsvWriter csv(out, {"series", "x", "y", "y_err"});
    for (const auto& s : bundle.series)
        for (const auto& p : s.points)
            csv.row(std::vector<std::string>{s.name, format_number(p.x), format_number(p.y), format_number(p.y_err)});
    return out.str();
}

}  // namespace spdelab::lab
