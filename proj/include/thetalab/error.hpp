#pragma once
#include <stdexcept>
#include <string>

namespace thetalab
{

struct Error : std::runtime_error
{
   using std::runtime_error::runtime_error;
};

// parameter outside the domain of a formula
struct DomainError : Error
{
   using Error::Error;
};

// denominators of a parametrization vanish
struct SingularParametrization : Error
{
   using Error::Error;
};

struct ValidationError : Error
{
   using Error::Error;
};

struct ResourceError : Error
{
   using Error::Error;
};

// requested data bin is empty
struct MissingDataError : Error
{
   using Error::Error;
};

} // namespace thetalab
