#include "sparsegal/report.hpp"

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>

#include "sparsegal/check.hpp"
#include "sparsegal/polytope.hpp"

namespace sparsegal {

namespace {

// Largest magnitude every JSON consumer reads back exactly.
const Int kSafeLimit = (Int(1) << 53) - 1;

Json encode_int(const Int& v) {
    const Int magnitude = abs(v);
    if (magnitude <= kSafeLimit) return Json(static_cast<std::int64_t>(v.get_si()));
    return Json(v.get_str());
}

Json encode_vector(const std::vector<Int>& v) {
    Json out = Json::array();
    for (const Int& x : v) out.push_back(encode_int(x));
    return out;
}

Json encode_sets(const std::vector<std::vector<Point>>& sets) {
    Json out = Json::array();
    for (const auto& set : sets) {
        Json s = Json::array();
        for (const Point& p : set) s.push_back(encode_vector(p));
        out.push_back(std::move(s));
    }
    return out;
}

Json encode_columns(const IntMatrix& m) {
    Json out = Json::array();
    for (int j = 0; j < m.cols(); ++j) {
        Json col = Json::array();
        for (int i = 0; i < m.rows(); ++i) col.push_back(encode_int(m.at(i, j)));
        out.push_back(std::move(col));
    }
    return out;
}

void expect(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

Int parse_entry(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return Int(static_cast<long>(j.get<std::int64_t>()));
    if (j.is_string()) {
        try {
            return Int(j.get<std::string>());
        } catch (const std::invalid_argument&) {
            throw InputError(where + ": '" + j.get<std::string>() +
                             "' is not a decimal integer");
        }
    }
    throw InputError(where + ": expected an integer or a decimal string");
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("document is not valid JSON: ") + e.what());
    }
}

void expect_version(const Json& doc) {
    expect(doc.is_object(), "document root must be an object");
    expect(doc.contains("version") && doc["version"].is_number_integer() &&
               doc["version"].get<int>() == 1,
           "document must declare version 1");
}

IntMatrix parse_columns(const Json& j, int rows, const std::string& name) {
    expect(j.is_array(), name + " must be an array of columns");
    std::vector<std::vector<Int>> cols;
    for (const Json& col : j) {
        expect(col.is_array() && static_cast<int>(col.size()) == rows,
               name + " columns must have one entry per ambient generator");
        std::vector<Int> c;
        for (const Json& entry : col) c.push_back(parse_entry(entry, name));
        cols.push_back(std::move(c));
    }
    if (cols.empty()) return IntMatrix(rows, 0);
    return IntMatrix::from_columns(cols);
}

const char* kind_name(VerdictKind kind) {
    switch (kind) {
        case VerdictKind::ExpectedWreath: return "expected-wreath";
        case VerdictKind::StrictlySmaller: return "strictly-smaller";
        case VerdictKind::Inconclusive: return "inconclusive";
    }
    throw InternalError("unknown verdict kind");
}

const char* condition_name(FiredCondition fired) {
    switch (fired) {
        case FiredCondition::None: return "none";
        case FiredCondition::EdgeVectors: return "edge-vectors";
        case FiredCondition::SimplexEmbedding: return "simplex-embedding";
        case FiredCondition::CycleVectors: return "cycle-vectors";
    }
    throw InternalError("unknown fired condition");
}

Json group_json(const GroupDescriptor& g) {
    Json out;
    out["deck_invariants"] = encode_vector(g.abelian_invariants);
    out["deck_order"] = encode_int(g.deck_order);
    out["block_count"] = encode_int(g.block_count);
    out["root_count"] = encode_int(g.root_count);
    out["order"] = encode_int(g.order);
    return out;
}

// Text-side helpers: the renderer reads the JSON document and nothing else.
std::string int_text(const Json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

std::string vector_text(const Json& arr) {
    std::string out = "(";
    for (size_t i = 0; i < arr.size(); ++i) {
        if (i) out += ", ";
        out += int_text(arr[i]);
    }
    return out + ")";
}

std::string set_text(const Json& set) {
    std::string out = "{";
    for (size_t i = 0; i < set.size(); ++i) {
        if (i) out += " ";
        out += vector_text(set[i]);
    }
    return out + "}";
}

std::string index_set_text(const Json& arr) {
    std::string out = "{";
    for (size_t i = 0; i < arr.size(); ++i) {
        if (i) out += ", ";
        out += arr[i].dump();
    }
    return out + "}";
}

void support_lines(std::ostream& os, const Json& sets, const std::string& indent) {
    for (size_t i = 0; i < sets.size(); ++i)
        os << indent << "support " << i << ": " << set_text(sets[i]) << "\n";
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

void render_analysis_text(std::ostream& os, const Json& report) {
    const Json& input = report.at("input");
    os << report.at("command").get<std::string>() << " report\n";
    os << "input: n = " << input.at("n").dump() << "\n";
    support_lines(os, input.at("supports"), "  ");
    if (input.contains("labels")) {
        os << "  labels:";
        for (const Json& label : input.at("labels")) os << " " << label.get<std::string>();
        os << "\n";
    }

    const Json& norm = report.at("normalization");
    if (norm.at("changed").get<bool>()) {
        os << "normalization: translated so every set contains the origin\n";
        support_lines(os, norm.at("supports"), "  ");
    } else {
        os << "normalization: already normalized\n";
    }

    const Json& red = report.at("reduction");
    os << "reduction: index " << int_text(red.at("index")) << ", deck invariants "
       << vector_text(red.at("deck_invariants")) << "\n";
    if (!red.at("is_reduced").get<bool>()) {
        os << "  embedding columns:";
        for (const Json& col : red.at("embedding_columns")) os << " " << vector_text(col);
        os << "\n";
        support_lines(os, red.at("reduced_supports"), "  reduced ");
    }

    const Json& mv = report.at("mixed_volume");
    os << "mixed volume: full " << int_text(mv.at("full")) << ", reduced "
       << int_text(mv.at("reduced")) << "\n";
    os << "analogous: " << yes_no(report.at("analogous").get<bool>()) << ", ample: "
       << yes_no(report.at("ample").get<bool>()) << "\n";

    os << "essential covectors:\n";
    for (const Json& row : report.at("essential")) {
        os << "  " << vector_text(row.at("gamma")) << ": sets "
           << index_set_text(row.at("sets")) << ", multiplicity "
           << int_text(row.at("multiplicity")) << " = " << int_text(row.at("index_factor"))
           << " * " << int_text(row.at("volume_factor"));
        if (row.at("fully_degenerate").get<bool>()) os << ", fully degenerate";
        os << ", tuple " << row.at("tuple_id").dump() << "\n";
    }

    const Json& verdict = report.at("verdict");
    const std::string kind = verdict.at("kind").get<std::string>();
    os << "verdict: ";
    if (kind == "expected-wreath") {
        os << "the Galois group is the full wreath product";
    } else if (kind == "strictly-smaller") {
        os << "the Galois group is strictly smaller than the wreath product";
    } else {
        os << "inconclusive";
    }
    os << "\n";
    const Json& group = verdict.at("expected_group");
    os << "  expected group: order " << int_text(group.at("order")) << ", deck order "
       << int_text(group.at("deck_order")) << ", blocks " << int_text(group.at("block_count"))
       << ", roots " << int_text(group.at("root_count")) << "\n";
    os << "  decided by: " << verdict.at("condition").get<std::string>() << "\n";
    if (verdict.contains("witness")) {
        const Json& witness = verdict.at("witness");
        os << "  witness: b = " << vector_text(witness.at("b")) << ", p = "
           << int_text(witness.at("p")) << "\n";
    }
    if (verdict.contains("note")) os << "  note: " << verdict.at("note").get<std::string>() << "\n";

    if (report.contains("monodromy")) {
        const Json& m = report.at("monodromy");
        os << "monodromy: order " << int_text(m.at("order")) << ", lattice "
           << m.at("lattice").get<std::string>()
           << (m.at("budget_exhausted").get<bool>() ? " (budget exhausted)" : "") << "\n";
        os << "  blocks:";
        for (const Json& block : m.at("blocks")) os << " " << index_set_text(block);
        os << "\n";
        const Json& loops = m.at("loops");
        os << "  loops: attempted " << loops.at("attempted").dump() << ", accepted "
           << loops.at("accepted").dump() << ", discarded " << loops.at("discarded").dump()
           << ", signature failures " << loops.at("signature_failures").dump() << "\n";
        const Json& kinds = loops.at("kinds");
        os << "    random triangles " << kinds.at("random_triangle").dump()
           << ", coefficient circles " << kinds.at("coefficient_circle").dump()
           << ", trinomials " << kinds.at("trinomial").dump() << ", facet resultants "
           << kinds.at("facet_resultant").dump() << "\n";
        const Json& wreath = m.at("wreath");
        os << "  wreath bound: deck " << int_text(wreath.at("deck_order")) << ", blocks "
           << int_text(wreath.at("block_count")) << ", full order "
           << int_text(wreath.at("full_order")) << ", index " << int_text(wreath.at("index"))
           << "\n";
        os << "  divisibility:";
        for (const Json& row : m.at("poisson"))
            os << " b " << vector_text(row.at("b")) << " modulus " << int_text(row.at("modulus"))
               << " loops " << row.at("loops_checked").dump() << ";";
        os << "\n";
    }

    const Json& config = report.at("config");
    os << "config: seed " << config.at("seed").dump() << ", budget " << config.at("budget").dump()
       << ", newton tol " << config.at("newton_tol").dump() << ", match tol "
       << config.at("match_tol").dump() << "\n";
}

}  // namespace

TupleDocument parse_tuple_document(const std::string& text) {
    const Json doc = parse_json(text);
    expect_version(doc);
    expect(doc.contains("n") && doc["n"].is_number_integer(),
           "document must declare an integer n");
    const int n = doc["n"].get<int>();
    expect(n >= 1, "n must be positive");
    expect(doc.contains("supports") && doc["supports"].is_array(),
           "document must list the support sets");
    const Json& supports = doc["supports"];
    expect(static_cast<int>(supports.size()) == n,
           "a square system needs exactly n support sets");

    TupleDocument out;
    out.tuple.n = n;
    for (const Json& set : supports) {
        expect(set.is_array() && !set.empty(), "each support set must be a nonempty array");
        std::vector<Point> pts;
        for (const Json& vec : set) {
            expect(vec.is_array() && static_cast<int>(vec.size()) == n,
                   "each exponent vector must have length n");
            Point p;
            for (const Json& entry : vec) p.push_back(parse_entry(entry, "exponent"));
            pts.push_back(std::move(p));
        }
        out.tuple.sets.push_back(dedupe_points(pts));
    }
    if (doc.contains("labels")) {
        const Json& labels = doc["labels"];
        expect(labels.is_array() && static_cast<int>(labels.size()) == n,
               "labels must name one support set each");
        for (const Json& label : labels) {
            expect(label.is_string(), "labels must be strings");
            out.labels.push_back(label.get<std::string>());
        }
    }
    return out;
}

ConnectivityDocument parse_connectivity_document(const std::string& text) {
    const Json doc = parse_json(text);
    expect_version(doc);
    expect(doc.contains("ambient_generators") && doc["ambient_generators"].is_number_integer(),
           "document must declare the ambient generator count");
    const int k = doc["ambient_generators"].get<int>();
    expect(k >= 1, "ambient generator count must be positive");
    expect(doc.contains("relations"), "document must list the ambient relations");
    expect(doc.contains("cover_image") && doc.contains("subset_image"),
           "document must list the cover and subset generator matrices");

    ConnectivityDocument out;
    out.ambient.generator_count = k;
    out.ambient.relations = parse_columns(doc["relations"], k, "relations");
    out.cover_image = parse_columns(doc["cover_image"], k, "cover_image");
    out.subset_image = parse_columns(doc["subset_image"], k, "subset_image");
    return out;
}

Json analysis_report(const TupleDocument& doc, const ReportConfig& config) {
    const SupportTuple normalized = normalize(doc.tuple);
    const ReductionData red = reduction(normalized);
    const Verdict verdict = criterion(normalized);
    const bool analogous = is_analogous(normalized);
    const EssentialData essential = essential_vectors(normalized);

    Json report;
    report["version"] = 1;
    report["command"] = "analyze";

    Json input;
    input["n"] = doc.tuple.n;
    input["supports"] = encode_sets(doc.tuple.sets);
    if (!doc.labels.empty()) input["labels"] = doc.labels;
    report["input"] = std::move(input);

    Json norm;
    norm["changed"] = !(normalized == doc.tuple);
    norm["supports"] = encode_sets(normalized.sets);
    report["normalization"] = std::move(norm);

    Json reduction_json;
    reduction_json["index"] = encode_int(red.index_m);
    reduction_json["deck_invariants"] = encode_vector(red.abelian_invariants);
    reduction_json["embedding_columns"] = encode_columns(red.embedding);
    reduction_json["reduced_supports"] = encode_sets(red.reduced.sets);
    reduction_json["is_reduced"] = is_reduced(normalized);
    report["reduction"] = std::move(reduction_json);

    Json mixed;
    mixed["full"] = encode_int(verdict.group.root_count);
    mixed["reduced"] = encode_int(verdict.group.block_count);
    report["mixed_volume"] = std::move(mixed);

    report["analogous"] = analogous;
    report["ample"] = analogous && is_ample(normalized);

    Json table = Json::array();
    for (const EssentialRecord& record : essential.records) {
        Json row;
        row["gamma"] = encode_vector(record.gamma);
        row["sets"] = record.k_set;
        row["index_factor"] = encode_int(record.d_prime);
        row["volume_factor"] = encode_int(record.d_double);
        row["multiplicity"] = encode_int(record.d);
        row["fully_degenerate"] = record.fully_degenerate;
        row["tuple_id"] = record.tuple_id;
        table.push_back(std::move(row));
    }
    report["essential"] = std::move(table);

    Json verdict_json;
    verdict_json["kind"] = kind_name(verdict.kind);
    verdict_json["condition"] = condition_name(verdict.fired);
    verdict_json["expected_group"] = group_json(verdict.group);
    if (verdict.witness) {
        Json witness;
        witness["b"] = encode_vector(verdict.witness->b);
        witness["p"] = encode_int(verdict.witness->p);
        verdict_json["witness"] = std::move(witness);
    }
    if (!verdict.note.empty()) verdict_json["note"] = verdict.note;
    report["verdict"] = std::move(verdict_json);

    Json config_json;
    config_json["seed"] = config.seed;
    config_json["budget"] = config.budget;
    config_json["newton_tol"] = config.newton_tol;
    config_json["match_tol"] = config.match_tol;
    report["config"] = std::move(config_json);
    return report;
}

Json monodromy_report(const TupleDocument& doc, const ReportConfig& config) {
    Json report = analysis_report(doc, config);
    report["command"] = "monodromy";

    const SupportTuple normalized = normalize(doc.tuple);
    MonodromyOptions options;
    options.seed = config.seed;
    options.budget = config.budget;
    options.solve.newton_tol = config.newton_tol;
    options.track.newton_tol = config.newton_tol;
    options.match.tol = config.match_tol;
    const MonodromyRun run = run_monodromy(normalized, options);
    const WreathReport wreath = verify_wreath_structure(run, run.reduction);

    Json m;
    m["seed"] = run.seed;
    m["stable_window"] = run.stable_window;

    Json loops;
    loops["attempted"] = run.loops_attempted;
    loops["accepted"] = run.loops_accepted;
    loops["discarded"] = run.loops_discarded;
    loops["signature_failures"] = run.signature_failures;
    int counts[4] = {0, 0, 0, 0};
    for (const ExecutedLoop& loop : run.loops) ++counts[static_cast<int>(loop.kind)];
    Json kinds;
    kinds["random_triangle"] = counts[0];
    kinds["coefficient_circle"] = counts[1];
    kinds["trinomial"] = counts[2];
    kinds["facet_resultant"] = counts[3];
    loops["kinds"] = std::move(kinds);
    m["loops"] = std::move(loops);

    m["order"] = encode_int(run.order);
    m["blocks"] = run.blocks;
    m["lattice"] = run.lattice_status == LatticeStatus::Full ? "full" : "undecided";
    m["budget_exhausted"] = run.budget_exhausted;

    Json wreath_json;
    wreath_json["deck_order"] = encode_int(wreath.deck_order);
    wreath_json["block_count"] = encode_int(wreath.block_count);
    wreath_json["full_order"] = encode_int(wreath.full_order);
    wreath_json["index"] = encode_int(wreath.index);
    m["wreath"] = std::move(wreath_json);

    Json poisson = Json::array();
    for (int i = 0; i < normalized.n; ++i) {
        Covector b(static_cast<size_t>(normalized.n), Int(0));
        b[static_cast<size_t>(i)] = 1;
        const PoissonReport check = poisson_divisibility_check(run, b);
        Json row;
        row["b"] = encode_vector(b);
        row["modulus"] = encode_int(check.modulus);
        row["loops_checked"] = check.loops_checked;
        poisson.push_back(std::move(row));
    }
    m["poisson"] = std::move(poisson);

    report["monodromy"] = std::move(m);
    return report;
}

Json mixed_volume_report(const TupleDocument& doc) {
    Json report;
    report["version"] = 1;
    report["command"] = "mixed-volume";
    report["n"] = doc.tuple.n;
    report["mixed_volume"] = encode_int(lattice_mixed_volume(doc.tuple.sets));
    return report;
}

Json connectivity_report(const ConnectivityDocument& doc) {
    Json report;
    report["version"] = 1;
    report["command"] = "connectivity";
    report["ambient_generators"] = doc.ambient.generator_count;
    report["connected"] = inductive_connectivity(doc.cover_image, doc.subset_image, doc.ambient);
    return report;
}

std::string render_json(const Json& report) { return report.dump(2) + "\n"; }

std::string render_text(const Json& report) {
    std::ostringstream os;
    const std::string command = report.at("command").get<std::string>();
    if (command == "mixed-volume") {
        os << int_text(report.at("mixed_volume")) << "\n";
    } else if (command == "connectivity") {
        os << (report.at("connected").get<bool>() ? "true" : "false") << "\n";
    } else {
        render_analysis_text(os, report);
    }
    return os.str();
}

}  // namespace sparsegal
