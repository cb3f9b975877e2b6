#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fres/corpus.hpp"
#include "fres/table.hpp"

namespace testsupport {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        root_ = std::filesystem::temp_directory_path() /
                ("fres_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(root_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(root_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path() const { return root_; }
    std::string file(const std::string& name) const { return (root_ / name).string(); }

    std::string write(const std::string& name, const std::string& content) const {
        const std::string p = file(name);
        std::ofstream out(p, std::ios::binary);
        out << content;
        return p;
    }

private:
    static int& counter() {
        static int value = 0;
        return value;
    }
    std::filesystem::path root_;
};

// Minimal PNG: signature + IHDR with the given dimensions. Enough for the
// header reader and for byte payload fixtures.
inline std::string png_bytes(std::uint32_t width, std::uint32_t height) {
    std::string out;
    const unsigned char signature[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    out.append(reinterpret_cast<const char*>(signature), 8);
    const auto be32 = [&out](std::uint32_t v) {
        out.push_back(static_cast<char>((v >> 24) & 0xFF));
        out.push_back(static_cast<char>((v >> 16) & 0xFF));
        out.push_back(static_cast<char>((v >> 8) & 0xFF));
        out.push_back(static_cast<char>(v & 0xFF));
    };
    be32(13);  // IHDR length
    out += "IHDR";
    be32(width);
    be32(height);
    const unsigned char rest[] = {8, 2, 0, 0, 0};  // bit depth etc.
    out.append(reinterpret_cast<const char*>(rest), 5);
    be32(0);  // CRC, unchecked by the reader
    return out;
}

inline std::string random_word(std::mt19937& rng, int min_len = 1, int max_len = 8) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
    std::uniform_int_distribution<int> len_dist(min_len, max_len);
    std::uniform_int_distribution<int> char_dist(0, sizeof(alphabet) - 2);
    const int len = len_dist(rng);
    std::string word;
    for (int i = 0; i < len; ++i) word.push_back(alphabet[char_dist(rng)]);
    return word;
}

// Rectangular flat table with trimmed single-line cell texts (the shape the
// markdown round trip is defined over). ~10% empty cells.
inline fres::Table random_flat_table(std::mt19937& rng) {
    std::uniform_int_distribution<int> col_dist(1, 6);
    std::uniform_int_distribution<int> row_dist(1, 8);
    std::uniform_int_distribution<int> empty_dist(0, 9);
    const int cols = col_dist(rng);
    const int rows = row_dist(rng);
    std::vector<std::string> header;
    for (int c = 0; c < cols; ++c) header.push_back(random_word(rng));
    std::vector<std::vector<std::string>> body;
    for (int r = 0; r < rows; ++r) {
        std::vector<std::string> row;
        for (int c = 0; c < cols; ++c)
            row.push_back(empty_dist(rng) == 0 ? std::string{} : random_word(rng));
        body.push_back(std::move(row));
    }
    return fres::Table::from_strings({header}, body);
}

inline fres::QAInstance make_instance(std::string id, std::string dataset,
                                      std::string question, fres::Table table,
                                      std::vector<std::string> gold) {
    fres::QAInstance inst;
    inst.id = std::move(id);
    inst.dataset = std::move(dataset);
    inst.question = std::move(question);
    inst.table = std::move(table);
    inst.gold_answers = std::move(gold);
    return inst;
}

// A table whose markdown serialization lands on the requested side of the
// token threshold: `big` tables also exceed the default pixel threshold.
inline fres::Table sized_table(bool big) {
    if (!big) return fres::Table::from_strings({{"a", "b"}}, {{"1", "2"}});
    std::vector<std::string> header;
    for (int c = 0; c < 5; ++c) header.push_back("column_header_name_" + std::to_string(c));
    std::vector<std::vector<std::string>> body;
    for (int r = 0; r < 70; ++r) {
        std::vector<std::string> row;
        for (int c = 0; c < 5; ++c)
            row.push_back("value entry number " + std::to_string(r) + "_" + std::to_string(c));
        body.push_back(std::move(row));
    }
    return fres::Table::from_strings({header}, body);
}

}  // namespace testsupport
