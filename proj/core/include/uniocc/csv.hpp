#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace uniocc::csv {

// RFC 4180 field quoting. Quotes a field only when needed.
std::string escape(const std::string& field);

std::string join(const std::vector<std::string>& fields);

// Reads one record (handles quoted fields, embedded commas/newlines).
// Returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& out);

// Header-aware reader over a comma-separated file.
class Reader {
public:
    explicit Reader(const std::string& path);

    bool is_open() const { return in_.is_open(); }
    const std::vector<std::string>& header() const { return header_; }
    bool has_column(const std::string& name) const;
    // Index of a required column; throws SchemaError if absent.
    std::size_t column(const std::string& name) const;

    // Advances to the next data row. Short rows are padded with "".
    bool next(std::vector<std::string>& row);
    std::size_t line() const { return record_; }

private:
    std::ifstream in_;
    std::string path_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t record_ = 1;
};

} // namespace uniocc::csv
