#pragma once

#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "tabroute/errors.hpp"

namespace tabroute {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// All file outputs go through here: write to a sibling temp file, then rename.
// A killed process never leaves a truncated output at the target path.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw parse_error("cannot open file for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw parse_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// Calls fn(line_number, line) for each non-empty line. line_number is 1-based.
inline void for_each_jsonl_line(const std::string& content,
                                const std::function<void(std::size_t, const std::string&)>& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        std::string line = content.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        ++line_no;
        if (!line.empty() && line != "\r") {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            fn(line_no, line);
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
}

// Shortest round-trip formatting, locale-independent. Used anywhere output
// bytes must be reproducible (CSV curves, logs).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers index into
// pre-sized result slots, so aggregation order stays deterministic.
inline void parallel_for_indexed(std::size_t n, unsigned workers,
                                 const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace tabroute
