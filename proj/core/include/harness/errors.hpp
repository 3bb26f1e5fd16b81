// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace harness
{

struct HarnessError: std::runtime_error
{
    using std::runtime_error::runtime_error;
};

#define HARNESS_DECLARE_ERROR(Name)                 \
    struct Name: HarnessError                       \
    {                                               \
        using HarnessError::HarnessError;           \
    }

HARNESS_DECLARE_ERROR(EnvironmentMismatch);
HARNESS_DECLARE_ERROR(PolicyFault);
HARNESS_DECLARE_ERROR(UnknownTool);
HARNESS_DECLARE_ERROR(UnknownTask);
HARNESS_DECLARE_ERROR(NotAFailure);
HARNESS_DECLARE_ERROR(EmptyMatrix);
HARNESS_DECLARE_ERROR(KMismatch);
HARNESS_DECLARE_ERROR(ZeroBaseline);
HARNESS_DECLARE_ERROR(EmptyTrainSet);
HARNESS_DECLARE_ERROR(FrozenSetError);
HARNESS_DECLARE_ERROR(ConfigError);
HARNESS_DECLARE_ERROR(SchemaVersionError);
HARNESS_DECLARE_ERROR(ConditionSyntaxError);
HARNESS_DECLARE_ERROR(SplitViolation);

#undef HARNESS_DECLARE_ERROR

/// The remote model endpoint could not be reached or answered with an error.
struct RemoteUnavailable: PolicyFault
{
    using PolicyFault::PolicyFault;
};

} // namespace harness
