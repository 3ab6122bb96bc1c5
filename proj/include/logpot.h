#ifndef LOGPOT_H
#define LOGPOT_H

#include <stddef.h>

#if defined(LOGPOT_BUILDING_LIBRARY)
#define LOGPOT_API __attribute__((visibility("default")))
#else
#define LOGPOT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum logpot_status {
    LOGPOT_OK = 0,
    /* The command ran and its verdict is negative: not typable, infeasible,
       a validation violation, or nontermination. */
    LOGPOT_NEGATIVE = 1,
    /* Malformed or unreadable input, bad arguments. */
    LOGPOT_INPUT_ERROR = 2,
    LOGPOT_INVALID_HANDLE = 3,
    LOGPOT_INTERNAL_ERROR = 4
} logpot_status;

typedef struct logpot_session logpot_session;

LOGPOT_API const char* logpot_version(void);
LOGPOT_API const char* logpot_status_string(logpot_status status);

LOGPOT_API logpot_status logpot_session_create(logpot_session** out);
LOGPOT_API void logpot_session_destroy(logpot_session* session);

/* Keys: template ("a=0..1,b=0..2"), fuel, seed, let-constants (shared|split),
   corpus (exhaustive|random), max-leaves, count, key-limit, force (0|1),
   function (appends an inference root), sig-out, threads, sequences,
   sequence-length, sequence-leaves. */
LOGPOT_API logpot_status logpot_set_option(logpot_session* session, const char* key, const char* value);

LOGPOT_API logpot_status logpot_check(logpot_session* session, const char* program_file, const char* sig_file);
LOGPOT_API logpot_status logpot_infer(logpot_session* session, const char* program_file);
LOGPOT_API logpot_status logpot_eval(logpot_session* session, const char* program_file, const char* function,
                                     const char* const* args, size_t nargs);
LOGPOT_API logpot_status logpot_validate(logpot_session* session, const char* program_file, const char* sig_file);

/* Results of the last command; valid until the next call on the session. */
LOGPOT_API const char* logpot_report_text(const logpot_session* session);
LOGPOT_API const char* logpot_report_json(const logpot_session* session);
LOGPOT_API const char* logpot_last_error(const logpot_session* session);

#ifdef __cplusplus
}
#endif

#endif
