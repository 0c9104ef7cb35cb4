#pragma once

#include <string>
#include <vector>

namespace uwarrant::cli {

// Renders a double with 17 significant digits (lossless round-trip),
// independent of locale.  Non-finite values render as JSON null.
std::string format_number(double value);

// Ordered JSON writer: fields are emitted exactly in insertion order with a
// fixed layout, so identical inputs produce identical bytes.
class JsonWriter {
public:
    JsonWriter();

    void field(const std::string& name, double value);
    void field(const std::string& name, const std::string& value);
    void field(const std::string& name, const char* value);
    void field_int(const std::string& name, long long value);
    void field_bool(const std::string& name, bool value);

    void open_object(const std::string& name);
    void open_array(const std::string& name);
    void item(double value);
    void item_pair(double first, double second);  // rendered as a two-element array
    void close();  // closes the innermost open object or array

    // Closes the root object and returns the document, newline-terminated.
    [[nodiscard]] std::string str();

private:
    void comma();
    void indent();

    std::string out_;
    std::vector<char> stack_;  // '{' or '['
    std::vector<bool> has_items_;
};

// One CSV row per (alpha, t) pair, header alpha,t,value.
struct CsvRow {
    double alpha;
    double t;
    double value;
};
std::string render_csv(const std::vector<CsvRow>& rows);

// Writes to the given path, or to stdout when the path is empty.
void write_output(const std::string& out_path, const std::string& content);

}  // namespace uwarrant::cli
