#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fres {

// Failure domains map to CLI exit codes: Usage=1, Data=2, Gateway=3.
enum class ErrorKind { Usage, Data, Gateway };

class Error : public std::runtime_error {
public:
    Error(std::string code, ErrorKind kind, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

    // Stable machine-readable identifier, e.g. "malformed_input".
    const std::string& code() const noexcept { return code_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string code_;
    ErrorKind kind_;
};

#define FRES_DEFINE_ERROR(Name, code_str, kind)                          \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& message)                        \
            : Error(code_str, kind, message) {}                          \
    }

FRES_DEFINE_ERROR(MalformedInput, "malformed_input", ErrorKind::Data);
FRES_DEFINE_ERROR(EmptyTable, "empty_table", ErrorKind::Data);
FRES_DEFINE_ERROR(UnsupportedLayout, "unsupported_layout", ErrorKind::Data);
FRES_DEFINE_ERROR(MissingImage, "missing_image", ErrorKind::Data);
FRES_DEFINE_ERROR(TemplateError, "template_error", ErrorKind::Data);
FRES_DEFINE_ERROR(GatewayError, "gateway_error", ErrorKind::Gateway);
FRES_DEFINE_ERROR(AuthError, "auth_error", ErrorKind::Gateway);
FRES_DEFINE_ERROR(UnparseableLlmReply, "unparseable_llm_reply", ErrorKind::Gateway);
FRES_DEFINE_ERROR(UnparseableDecomposition, "unparseable_decomposition", ErrorKind::Gateway);
FRES_DEFINE_ERROR(IncompleteResults, "incomplete_results", ErrorKind::Data);
FRES_DEFINE_ERROR(IncompleteRepredictions, "incomplete_repredictions", ErrorKind::Data);
FRES_DEFINE_ERROR(AllZeroDifferences, "all_zero_differences", ErrorKind::Data);
FRES_DEFINE_ERROR(ConfigError, "config_error", ErrorKind::Usage);
FRES_DEFINE_ERROR(IoError, "io_error", ErrorKind::Data);

#undef FRES_DEFINE_ERROR

// Carries the per-cell shortfall report for quota sampling.
class InsufficientPool : public Error {
public:
    struct Shortfall {
        std::string dataset;
        std::string setting;
        int requested = 0;
        int available = 0;
    };

    InsufficientPool(const std::string& message, std::vector<Shortfall> cells)
        : Error("insufficient_pool", ErrorKind::Data, message),
          cells_(std::move(cells)) {}

    const std::vector<Shortfall>& cells() const noexcept { return cells_; }

private:
    std::vector<Shortfall> cells_;
};

}  // namespace fres
