#include "sqp/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace sqp {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot write " + path.string());
    }
    return out;
}

std::string location(const std::filesystem::path& path, int line_no) {
    return path.filename().string() + ":" + std::to_string(line_no);
}

bool is_blank_or_comment(const std::string& line) {
    for (char ch : line) {
        if (ch == '#') {
            return true;
        }
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
        fields.back().pop_back();
    }
    return fields;
}

std::vector<std::string> split_whitespace(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream is(line);
    std::string token;
    while (is >> token) {
        fields.push_back(std::move(token));
    }
    return fields;
}

double parse_double(const std::string& token, const std::string& where) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw io_error(where + ": not a number: '" + token + "'");
    }
    return value;
}

long parse_long(const std::string& token, const std::string& where) {
    long value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw io_error(where + ": not an integer: '" + token + "'");
    }
    return value;
}

std::optional<int> parse_optional_int(const std::string& token, const std::string& where) {
    if (token == "-") {
        return std::nullopt;
    }
    return static_cast<int>(parse_long(token, where));
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw contract_error("failed to format double");
    }
    return std::string(buffer, ptr);
}

EffectivenessMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    EffectivenessMatrix matrix;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# metric:", 0) == 0) {
            std::string name = line.substr(9);
            name.erase(0, name.find_first_not_of(" \t"));
            name.erase(name.find_last_not_of(" \t\r") + 1);
            matrix.set_metric_name(name);
            continue;
        }
        if (is_blank_or_comment(line)) {
            continue;
        }
        const std::string where = location(path, line_no);
        auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw io_error(where + ": expected config_id<TAB>query_id<TAB>score");
        }
        try {
            matrix.add_cell(fields[0], fields[1], parse_double(fields[2], where));
        } catch (const io_error& e) {
            throw io_error(where + ": " + e.what());
        }
    }
    matrix.finalize();
    return matrix;
}

void save_matrix(const EffectivenessMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "# metric: " << matrix.metric_name() << "\n";
    if (matrix.metric_name().rfind("ndcg", 0) == 0) {
        out << "# ndcg variant: gain 2^grade-1, discount 1/log2(rank+1)\n";
    } else if (matrix.metric_name().rfind("rbp", 0) == 0) {
        out << "# rbp variant: binary relevance (grade>0), base score\n";
    }
    for (std::size_t c = 0; c < matrix.configs().size(); ++c) {
        for (std::size_t q = 0; q < matrix.queries().size(); ++q) {
            out << matrix.configs()[c] << '\t' << matrix.queries()[q] << '\t'
                << format_double(matrix.score_at(c, q)) << '\n';
        }
    }
}

std::vector<RunList> load_runs(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<RunList> runs;
    std::unordered_map<QueryId, std::size_t> index;
    std::unordered_map<QueryId, std::set<std::string>> seen_docs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) {
            continue;
        }
        const std::string where = location(path, line_no);
        auto fields = split_whitespace(line);
        if (fields.size() != 6) {
            throw io_error(where + ": expected 'qid Q0 docid rank score tag'");
        }
        const QueryId& qid = fields[0];
        auto it = index.find(qid);
        if (it == index.end()) {
            it = index.emplace(qid, runs.size()).first;
            runs.push_back(RunList{qid, {}, fields[5]});
        }
        if (!seen_docs[qid].insert(fields[2]).second) {
            throw io_error(where + ": duplicate document '" + fields[2] + "' for query " + qid);
        }
        RunEntry entry;
        entry.doc_id = fields[2];
        entry.rank = static_cast<int>(parse_long(fields[3], where));
        entry.score = parse_double(fields[4], where);
        runs[it->second].entries.push_back(std::move(entry));
    }
    for (auto& run : runs) {
        std::vector<RunEntry> original = run.entries;
        std::stable_sort(run.entries.begin(), run.entries.end(),
                         [](const RunEntry& a, const RunEntry& b) {
                             if (a.score != b.score) {
                                 return a.score > b.score;
                             }
                             return a.doc_id < b.doc_id;
                         });
        bool repaired = false;
        for (std::size_t i = 0; i < run.entries.size(); ++i) {
            if (run.entries[i].doc_id != original[i].doc_id ||
                run.entries[i].rank != static_cast<int>(i + 1)) {
                repaired = true;
            }
            run.entries[i].rank = static_cast<int>(i + 1);
        }
        if (repaired) {
            warn("run " + path.filename().string() + " query " + run.query_id +
                 ": entries re-ranked by (score desc, doc_id asc)");
        }
    }
    return runs;
}

void save_runs(const std::vector<RunList>& runs, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const RunList& run : runs) {
        for (const RunEntry& entry : run.entries) {
            out << run.query_id << " Q0 " << entry.doc_id << ' ' << entry.rank << ' '
                << format_double(entry.score) << ' ' << run.tag << '\n';
        }
    }
}

Qrels load_qrels(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    Qrels qrels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) {
            continue;
        }
        const std::string where = location(path, line_no);
        auto fields = split_whitespace(line);
        if (fields.size() != 4) {
            throw io_error(where + ": expected 'qid 0 docid grade'");
        }
        try {
            qrels.add(fields[0], fields[2], static_cast<int>(parse_long(fields[3], where)));
        } catch (const io_error& e) {
            throw io_error(where + ": " + e.what());
        }
    }
    return qrels;
}

void save_qrels(const Qrels& qrels, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const QueryId& qid : qrels.queries()) {
        for (const auto& [doc, grade] : qrels.judgments(qid)) {
            out << qid << " 0 " << doc << ' ' << grade << '\n';
        }
    }
}

std::vector<FeatureRecord> load_features(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<FeatureRecord> records;
    std::set<std::tuple<QueryId, std::string, std::string>> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) {
            continue;
        }
        const std::string where = location(path, line_no);
        auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw io_error(where + ": expected query_id<TAB>doc_id<TAB>feature_name<TAB>value");
        }
        if (!seen.emplace(fields[0], fields[1], fields[2]).second) {
            throw io_error(where + ": duplicate feature (" + fields[0] + ", " + fields[1] +
                           ", " + fields[2] + ")");
        }
        records.push_back(
            FeatureRecord{fields[0], fields[1], fields[2], parse_double(fields[3], where)});
    }
    return records;
}

void save_features(const std::vector<FeatureRecord>& records,
                   const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const FeatureRecord& record : records) {
        out << record.query_id << '\t' << record.doc_id << '\t' << record.feature_name << '\t'
            << format_double(record.value) << '\n';
    }
}

std::vector<ConfigurationDescriptor> load_descriptors(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<ConfigurationDescriptor> descriptors;
    std::set<ConfigurationId> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) {
            continue;
        }
        const std::string where = location(path, line_no);
        auto fields = split_tabs(line);
        if (fields.size() != 6) {
            throw io_error(where + ": expected 6 tab-separated descriptor fields");
        }
        ConfigurationDescriptor d;
        d.config_id = fields[0];
        d.retrieval_model = fields[1];
        d.qe_model = fields[2];
        d.qe_docs = parse_optional_int(fields[3], where);
        d.qe_terms = parse_optional_int(fields[4], where);
        d.qe_min_docs = parse_optional_int(fields[5], where);
        if (!seen.insert(d.config_id).second) {
            throw io_error(where + ": duplicate descriptor for " + d.config_id);
        }
        try {
            d.validate();
        } catch (const io_error& e) {
            throw io_error(where + ": " + e.what());
        }
        descriptors.push_back(std::move(d));
    }
    return descriptors;
}

void save_descriptors(const std::vector<ConfigurationDescriptor>& descriptors,
                      const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    auto field = [](const std::optional<int>& v) {
        return v ? std::to_string(*v) : std::string("-");
    };
    for (const ConfigurationDescriptor& d : descriptors) {
        out << d.config_id << '\t' << d.retrieval_model << '\t' << d.qe_model << '\t'
            << field(d.qe_docs) << '\t' << field(d.qe_terms) << '\t' << field(d.qe_min_docs)
            << '\n';
    }
}

}  // namespace sqp
