// Copyright 2026 The qtlbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qtl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define QTL_DEFINE_ERROR(Name)                                     \
    class Name : public Error {                                    \
      public:                                                      \
        explicit Name(const std::string &what) : Error(#Name ": " + what) {} \
    }

QTL_DEFINE_ERROR(CapacityError);
QTL_DEFINE_ERROR(ShapeError);
QTL_DEFINE_ERROR(MalformedGateError);
QTL_DEFINE_ERROR(DegenerateInputError);
QTL_DEFINE_ERROR(UnsupportedGeneratorError);
QTL_DEFINE_ERROR(LabelError);
QTL_DEFINE_ERROR(NumericFault);
QTL_DEFINE_ERROR(ConfigError);
QTL_DEFINE_ERROR(DataError);
QTL_DEFINE_ERROR(FormatError);
QTL_DEFINE_ERROR(CorruptionError);
QTL_DEFINE_ERROR(InvalidCacheError);
QTL_DEFINE_ERROR(AggregationError);
QTL_DEFINE_ERROR(UndefinedMetricError);

#undef QTL_DEFINE_ERROR

}  // namespace qtl
