#include "uniocc/csv.hpp"

#include "uniocc/errors.hpp"

namespace uniocc::csv {

std::string escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    return out;
}

bool read_record(std::istream& in, std::vector<std::string>& out) {
    out.clear();
    int c = in.get();
    if (c == EOF) return false;

    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            out.push_back(field);
            return true;
        }
        any = true;
        if (in_quotes) {
            if (c == '"') {
                int next = in.peek();
                if (next == '"') {
                    in.get();
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += static_cast<char>(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get();
            out.push_back(field);
            return true;
        } else if (c == '\n') {
            out.push_back(field);
            return true;
        } else {
            field += static_cast<char>(c);
        }
        c = in.get();
    }
    (void)any;
}

Reader::Reader(const std::string& path) : in_(path), path_(path) {
    if (!in_.is_open()) throw SchemaError("cannot open " + path);
    if (!read_record(in_, header_) || header_.empty())
        throw SchemaError(path + ": missing header row");
    for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
}

bool Reader::has_column(const std::string& name) const {
    return index_.count(name) > 0;
}

std::size_t Reader::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw SchemaError(path_ + ": missing column '" + name + "'");
    return it->second;
}

bool Reader::next(std::vector<std::string>& row) {
    while (read_record(in_, row)) {
        ++record_;
        if (row.size() == 1 && row[0].empty()) continue; // blank line
        row.resize(header_.size());
        return true;
    }
    return false;
}

} // namespace uniocc::csv
