#pragma once

#include <string>
#include <zlib.h>

#include "hharnet/error.hpp"

namespace hharnet::internal {

/// Line reader over zlib's gzFile. zlib transparently handles plain
/// (uncompressed) files too, so .csv and .csv.gz both work.
class GzLineReader {
public:
    explicit GzLineReader(const std::string& path) : path_(path) {
        file_ = gzopen(path.c_str(), "rb");
        if (!file_) throw IoError("cannot open '" + path + "'");
        gzbuffer(file_, 1 << 16);
    }
    ~GzLineReader() {
        if (file_) gzclose(file_);
    }
    GzLineReader(const GzLineReader&) = delete;
    GzLineReader& operator=(const GzLineReader&) = delete;

    /// Reads the next line (without the trailing newline / carriage return)
    /// into `line`. Returns false at end of file.
    bool next_line(std::string& line) {
        line.clear();
        char buf[4096];
        bool got_any = false;
        for (;;) {
            if (gzgets(file_, buf, sizeof(buf)) == nullptr) {
                int errnum = 0;
                const char* msg = gzerror(file_, &errnum);
                if (errnum != Z_OK && errnum != Z_STREAM_END)
                    throw IoError("error reading '" + path_ + "': " + msg);
                return got_any;
            }
            got_any = true;
            line += buf;
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                break;
            }
            // buffer filled without a newline; keep reading
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

private:
    std::string path_;
    gzFile file_ = nullptr;
};

/// Writes a gzip-compressed text file.
class GzWriter {
public:
    explicit GzWriter(const std::string& path) : path_(path) {
        file_ = gzopen(path.c_str(), "wb");
        if (!file_) throw IoError("cannot open '" + path + "' for writing");
    }
    ~GzWriter() { close(); }
    GzWriter(const GzWriter&) = delete;
    GzWriter& operator=(const GzWriter&) = delete;

    void write(const std::string& text) {
        if (gzwrite(file_, text.data(), static_cast<unsigned>(text.size())) !=
            static_cast<int>(text.size()))
            throw IoError("failed writing '" + path_ + "'");
    }

    void close() {
        if (file_) {
            gzclose(file_);
            file_ = nullptr;
        }
    }

private:
    std::string path_;
    gzFile file_ = nullptr;
};

}  // namespace hharnet::internal
