#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "uwarrant/errors.hpp"

namespace uwarrant::cli {

std::string format_number(double value) {
    if (!std::isfinite(value)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out.push_back(ch);
                }
        }
    }
    return out;
}

}  // namespace

JsonWriter::JsonWriter() {
    out_ = "{";
    stack_.push_back('{');
    has_items_.push_back(false);
}

void JsonWriter::comma() {
    if (has_items_.back()) out_ += ",";
    has_items_.back() = true;
    indent();
}

void JsonWriter::indent() {
    out_ += "\n";
    out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::field(const std::string& name, double value) {
    comma();
    out_ += "\"" + escape(name) + "\": " + format_number(value);
}

void JsonWriter::field(const std::string& name, const std::string& value) {
    comma();
    out_ += "\"" + escape(name) + "\": \"" + escape(value) + "\"";
}

void JsonWriter::field(const std::string& name, const char* value) {
    field(name, std::string(value));
}

void JsonWriter::field_int(const std::string& name, long long value) {
    comma();
    out_ += "\"" + escape(name) + "\": " + std::to_string(value);
}

void JsonWriter::field_bool(const std::string& name, bool value) {
    comma();
    out_ += "\"" + escape(name) + "\": ";
    out_ += value ? "true" : "false";
}

void JsonWriter::open_object(const std::string& name) {
    comma();
    out_ += "\"" + escape(name) + "\": {";
    stack_.push_back('{');
    has_items_.push_back(false);
}

void JsonWriter::open_array(const std::string& name) {
    comma();
    out_ += "\"" + escape(name) + "\": [";
    stack_.push_back('[');
    has_items_.push_back(false);
}

void JsonWriter::item(double value) {
    comma();
    out_ += format_number(value);
}

void JsonWriter::item_pair(double first, double second) {
    comma();
    out_ += "[" + format_number(first) + ", " + format_number(second) + "]";
}

void JsonWriter::close() {
    const char open = stack_.back();
    const bool had_items = has_items_.back();
    stack_.pop_back();
    has_items_.pop_back();
    if (had_items) {
        out_ += "\n";
        out_.append(2 * stack_.size(), ' ');
    }
    out_ += open == '{' ? "}" : "]";
}

std::string JsonWriter::str() {
    while (stack_.size() > 1) close();
    if (has_items_.back()) out_ += "\n";
    out_ += "}\n";
    stack_.clear();
    has_items_.clear();
    return out_;
}

std::string render_csv(const std::vector<CsvRow>& rows) {
    std::string out = "alpha,t,value\n";
    for (const CsvRow& row : rows) {
        out += format_number(row.alpha) + "," + format_number(row.t) + "," +
               format_number(row.value) + "\n";
    }
    return out;
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("cannot open output file '" + out_path + "'");
    out << content;
    if (!out) throw DomainError("failed writing output file '" + out_path + "'");
}

}  // namespace uwarrant::cli
