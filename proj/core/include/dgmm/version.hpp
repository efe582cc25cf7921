#ifndef DGMM_VERSION_HPP
#define DGMM_VERSION_HPP

#define DGMM_VERSION "0.1.0"

#endif
