#include "tvwb/json_io.hpp"

#include <fstream>
#include <sstream>

namespace tvwb {

using nlohmann::json;

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json_file(const std::string& path) {
    std::string bytes = read_file_bytes(path);
    json doc = json::parse(bytes, nullptr, false);
    if (doc.is_discarded()) fail(ErrorKind::parse, "malformed JSON in " + path);
    return doc;
}

void require_schema(const json& doc) {
    if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_number_integer() ||
        doc["schema"].get<int>() != kSchemaVersion)
        fail(ErrorKind::parse, "document must carry \"schema\": 1");
}

namespace {

// one grid cell: JSON number, or string holding a fraction/decimal
std::pair<double, std::optional<Rational>> parse_cell(const json& cell) {
    if (cell.is_number()) {
        double v = cell.get<double>();
        // integers arrive exact
        if (cell.is_number_integer())
            return {v, Rational(cell.get<std::int64_t>(), 1)};
        return {v, std::nullopt};
    }
    if (cell.is_string()) {
        auto r = parse_rational(cell.get<std::string>());
        if (!r) fail(ErrorKind::parse, "cannot parse numeric entry \"" + cell.get<std::string>() + "\"");
        return {r->value(), *r};
    }
    fail(ErrorKind::parse, "numeric entry must be a number or a fraction string");
}

} // namespace

ParsedGrid parse_grid(const json& grid) {
    if (!grid.is_array() || grid.empty())
        fail(ErrorKind::parse, "matrix must be a nonempty array of rows");
    ParsedGrid out;
    out.rows = static_cast<int>(grid.size());
    bool all_exact = true;
    for (const auto& row : grid) {
        if (!row.is_array()) fail(ErrorKind::parse, "matrix rows must be arrays");
        if (out.cols == 0) out.cols = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != out.cols)
            fail(ErrorKind::parse, "matrix rows have inconsistent lengths");
        for (const auto& cell : row) {
            auto [v, r] = parse_cell(cell);
            out.values.push_back(v);
            if (r && all_exact) out.exact.push_back(*r);
            else all_exact = false;
        }
    }
    if (!all_exact) out.exact.clear();
    return out;
}

ProbVector parse_prob_vector(const json& arr) {
    if (!arr.is_array() || arr.size() < 2)
        fail(ErrorKind::parse, "\"p\" must be an array of at least 2 components");
    std::vector<Rational> exact;
    std::vector<double> values;
    bool all_exact = true;
    for (const auto& cell : arr) {
        auto [v, r] = parse_cell(cell);
        values.push_back(v);
        if (r && all_exact) exact.push_back(*r);
        else all_exact = false;
    }
    return all_exact ? ProbVector::from_fractions(exact) : ProbVector::from_reals(values);
}

StochasticMatrix parse_stochastic_doc(const json& doc, std::vector<std::string>* labels) {
    require_schema(doc);
    if (!doc.contains("matrix")) fail(ErrorKind::parse, "document lacks \"matrix\"");
    ParsedGrid grid = parse_grid(doc["matrix"]);
    if (grid.rows != grid.cols) fail(ErrorKind::parse, "matrix must be square");
    if (labels) {
        labels->clear();
        if (doc.contains("labels")) {
            for (const auto& l : doc["labels"]) labels->push_back(l.get<std::string>());
            if (static_cast<int>(labels->size()) != grid.rows)
                fail(ErrorKind::parse, "labels must name every state");
        }
    }
    if (!grid.exact.empty()) {
        std::vector<std::vector<Rational>> rows(grid.rows);
        for (int i = 0; i < grid.rows; ++i)
            rows[i].assign(grid.exact.begin() + static_cast<std::ptrdiff_t>(i) * grid.cols,
                           grid.exact.begin() + static_cast<std::ptrdiff_t>(i + 1) * grid.cols);
        return StochasticMatrix::from_fractions(rows);
    }
    std::vector<std::vector<double>> rows(grid.rows);
    for (int i = 0; i < grid.rows; ++i)
        rows[i].assign(grid.values.begin() + static_cast<std::ptrdiff_t>(i) * grid.cols,
                       grid.values.begin() + static_cast<std::ptrdiff_t>(i + 1) * grid.cols);
    return StochasticMatrix::from_reals(rows);
}

SystemDescriptor parse_system_doc(const json& doc) {
    require_schema(doc);
    if (!doc.contains("kind") || !doc["kind"].is_string())
        fail(ErrorKind::parse, "document lacks \"kind\"");
    std::string kind = doc["kind"].get<std::string>();

    if (kind == "markov") {
        if (!doc.contains("matrix")) fail(ErrorKind::parse, "markov descriptor lacks \"matrix\"");
        auto d = SystemDescriptor::make_markov(parse_stochastic_doc(doc, nullptr));
        if (doc.contains("p")) {
            ProbVector given = parse_prob_vector(doc["p"]);
            if (!given.same_as(d.p))
                fail(ErrorKind::invalid_input,
                     "provided \"p\" does not match the matrix row multiset");
        }
        return d;
    }

    if (!doc.contains("p")) fail(ErrorKind::parse, "descriptor lacks \"p\"");
    ProbVector p = parse_prob_vector(doc["p"]);

    if (kind == "bernoulli") return SystemDescriptor::make_bernoulli(std::move(p));

    if (kind == "finite-group-extension") {
        if (!doc.contains("group") || !doc["group"].is_object())
            fail(ErrorKind::parse, "descriptor lacks \"group\"");
        const json& g = doc["group"];
        std::vector<int> orders;
        if (g.contains("orders")) {
            for (const auto& o : g["orders"]) orders.push_back(o.get<int>());
        } else if (g.contains("order")) {
            orders.push_back(g["order"].get<int>());
        } else {
            fail(ErrorKind::parse, "group needs \"order\" or \"orders\"");
        }
        if (!g.contains("cocycle") || !g["cocycle"].is_array())
            fail(ErrorKind::parse, "group lacks \"cocycle\"");
        FiniteAbelianGroup grp(orders);
        std::vector<int> cocycle;
        for (const auto& c : g["cocycle"]) {
            if (c.is_number_integer()) {
                cocycle.push_back(c.get<int>());
            } else if (c.is_array()) { // tuple across the cyclic factors
                if (c.size() != orders.size())
                    fail(ErrorKind::parse, "cocycle tuple arity mismatch");
                int flat = 0, mult = 1;
                for (std::size_t i = 0; i < orders.size(); ++i) {
                    int comp = c[i].get<int>();
                    if (comp < 0 || comp >= orders[i])
                        fail(ErrorKind::parse, "cocycle tuple component out of range");
                    flat += comp * mult;
                    mult *= orders[i];
                }
                cocycle.push_back(flat);
            } else {
                fail(ErrorKind::parse, "cocycle entries must be integers or tuples");
            }
        }
        return SystemDescriptor::make_group_extension(std::move(p), std::move(grp),
                                                      std::move(cocycle));
    }

    if (kind == "circle-extension") {
        if (!doc.contains("alphas") || !doc["alphas"].is_array())
            fail(ErrorKind::parse, "descriptor lacks \"alphas\"");
        std::vector<double> alphas;
        for (const auto& a : doc["alphas"]) alphas.push_back(parse_cell(a).first);
        return SystemDescriptor::make_circle_extension(std::move(p), std::move(alphas));
    }

    fail(ErrorKind::parse, "unknown system kind \"" + kind + "\"");
}

TreeName parse_tree_name_doc(const json& doc) {
    require_schema(doc);
    if (!doc.contains("tree_name") || !doc["tree_name"].is_object())
        fail(ErrorKind::parse, "document lacks \"tree_name\"");
    const json& t = doc["tree_name"];
    if (!t.contains("p") || !t.contains("height") || !t.contains("labels"))
        fail(ErrorKind::parse, "tree_name needs \"p\", \"height\" and \"labels\"");
    ProbVector p = parse_prob_vector(t["p"]);
    int height = t["height"].get<int>();
    std::string kind_str = t.value("label_kind", std::string("discrete"));
    LabelKind kind;
    if (kind_str == "discrete") kind = LabelKind::discrete;
    else if (kind_str == "symbol-circle") kind = LabelKind::symbol_circle;
    else fail(ErrorKind::parse, "label_kind must be \"discrete\" or \"symbol-circle\"");

    TreeName name(p, height, kind);
    const json& labels = t["labels"];
    if (!labels.is_array() ||
        static_cast<std::int64_t>(labels.size()) != name.index().node_count() - 1)
        fail(ErrorKind::parse,
             "labels must list every node of length 1.." + std::to_string(height) +
                 " in level order (" + std::to_string(name.index().node_count() - 1) +
                 " entries)");
    for (std::int64_t v = 1; v < name.index().node_count(); ++v) {
        const json& cell = labels[static_cast<std::size_t>(v - 1)];
        Label& lab = name.label(v);
        if (kind == LabelKind::discrete) {
            if (cell.is_number_integer()) {
                lab.sym = cell.get<std::int32_t>();
            } else if (cell.is_array() && cell.size() == 2) {
                lab.sym = cell[0].get<std::int32_t>();
                lab.aux = cell[1].get<std::int32_t>();
            } else {
                fail(ErrorKind::parse, "discrete labels are integers or [sym, aux] pairs");
            }
        } else {
            if (!cell.is_array() || cell.size() != 2)
                fail(ErrorKind::parse, "symbol-circle labels are [sym, point] pairs");
            lab.sym = cell[0].get<std::int32_t>();
            lab.fiber = parse_cell(cell[1]).first;
            lab.has_fiber = true;
            if (!(lab.fiber >= 0.0 && lab.fiber < 1.0))
                fail(ErrorKind::parse, "circle points live in [0,1)");
        }
    }
    return name;
}

BlockCoupling parse_block_coupling_doc(const json& doc) {
    require_schema(doc);
    if (!doc.contains("p")) fail(ErrorKind::parse, "coupling document lacks \"p\"");
    if (!doc.contains("coupling")) fail(ErrorKind::parse, "coupling document lacks \"coupling\"");
    ProbVector p = parse_prob_vector(doc["p"]);
    ParsedGrid grid = parse_grid(doc["coupling"]);
    if (grid.rows != p.size() || grid.cols != p.size())
        fail(ErrorKind::parse, "coupling must be s x s for s = |p|");
    return BlockCoupling{std::move(p), std::move(grid.values)};
}

json matrix_to_json(const std::vector<double>& m, int rows, int cols) {
    json out = json::array();
    for (int i = 0; i < rows; ++i) {
        json row = json::array();
        for (int j = 0; j < cols; ++j) row.push_back(m[static_cast<std::size_t>(i) * cols + j]);
        out.push_back(std::move(row));
    }
    return out;
}

json report_to_json(const RunReport& report) {
    json out;
    out["command"] = report.command;
    out["inputs_digest"] = report.inputs_digest;
    out["results"] = report.results;
    if (report.has_seed) out["seed"] = report.seed;
    out["versions"] = {{"schema", kSchemaVersion}, {"tool", kToolVersion}};
    return out;
}

} // namespace tvwb
