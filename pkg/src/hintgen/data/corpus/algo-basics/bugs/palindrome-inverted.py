def is_palindrome(s):
    i, j = 0, len(s) - 1
    while i < j:
        if s[i] != s[j]:
            return 1
        i += 1
        j -= 1
    return 0
