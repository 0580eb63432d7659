#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sparsegal/criterion.hpp"
#include "sparsegal/lattice.hpp"
#include "sparsegal/monodromy.hpp"
#include "sparsegal/tuples.hpp"

namespace sparsegal {

// Insertion-ordered so serialized reports are byte-identical across runs.
using Json = nlohmann::ordered_json;

// On-disk description of a support tuple.
struct TupleDocument {
    int version = 1;
    SupportTuple tuple;
    std::vector<std::string> labels;  // optional, one per support set
};

// Parses {"version":1,"n":2,"supports":[[[0,0],[2,0]],...],"labels":[...]}.
// Integer entries may be JSON numbers or decimal strings.  Throws InputError.
TupleDocument parse_tuple_document(const std::string& text);

// On-disk description of a connectivity question: an ambient finitely
// generated abelian group and two subgroups given by generator matrices.
struct ConnectivityDocument {
    int version = 1;
    AbelianPresentation ambient;
    IntMatrix cover_image;   // columns generate the covering sublattice
    IntMatrix subset_image;  // columns generate the image of the subset
};

// Parses {"version":1,"ambient_generators":k,"relations":[[...]],
// "cover_image":[[...]],"subset_image":[[...]]} with column-major matrices.
ConnectivityDocument parse_connectivity_document(const std::string& text);

// Knobs echoed into every report; reports with equal inputs and equal
// configs serialize identically.
struct ReportConfig {
    unsigned seed = 0;
    int budget = 400;
    double newton_tol = 1e-12;
    double match_tol = 1e-4;
};

// Combinatorial report: input echo, normalization, reduction, mixed volumes,
// the essential-covector table, and the verdict with witnesses.
Json analysis_report(const TupleDocument& doc, const ReportConfig& config = {});

// Analysis report plus the numerical monodromy section: loop statistics,
// group order, block structure, solution-lattice status, wreath bound, and
// the divisibility checks along the coordinate directions.
Json monodromy_report(const TupleDocument& doc, const ReportConfig& config = {});

// {"mixed_volume": N} for the convex hulls of the supports.
Json mixed_volume_report(const TupleDocument& doc);

// {"connected": bool} deciding the inductive-connectivity question.
Json connectivity_report(const ConnectivityDocument& doc);

// Stable serializations.  The JSON document is the source of truth; the text
// rendering reads only the document.
std::string render_json(const Json& report);
std::string render_text(const Json& report);

}  // namespace sparsegal
