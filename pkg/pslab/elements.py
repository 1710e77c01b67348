""" Group elements of SL(d, R) and the words naming them.

    Generators are single lower case letters; the upper case letter names
    the inverse generator. The empty word names the identity.
"""
import numpy as np
from django.utils.functional import cached_property
from pslab.cartan import cartan_decomposition, cartan_projection, jordan_projection

__all__ = ('GroupElement', 'invert_letter', 'invert_word', 'reduce_word',
           'random_reduced_word', 'as_element')

#===============================================================================
# Words

def invert_letter(letter):
    return letter.swapcase()

def invert_word(word):
    return ''.join(letter.swapcase() for letter in reversed(word))

def reduce_word(word):
    """ Freely reduce a word, cancelling every adjacent xX and Xx """
    stack = []
    for letter in word:
        if stack and stack[-1] == letter.swapcase():
            stack.pop()
        else:
            stack.append(letter)
    return ''.join(stack)

def random_reduced_word(rng, letters, length):
    """ Uniformly random reduced word of given length over generator letters.
        letters holds lower case generator names; inverses are added.
    """
    alphabet = sorted(set(letters) | set(letter.upper() for letter in letters))
    word = []
    while len(word) < length:
        letter = alphabet[rng.integers(len(alphabet))]
        if word and word[-1] == letter.swapcase():
            continue
        word.append(letter)
    return ''.join(word)

#===============================================================================

class GroupElement(object):
    """ An element of SL(d, R) together with its exact inverse.

        Products are formed on both sides, g*h and h^-1*g^-1, so the inverse
        never comes from a matrix inversion. Cartan data are computed once.
    """
    def __init__(self, matrix, inverse=None, word=''):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError('Group elements are square matrices, got shape %r'
                             % (matrix.shape,))
        if inverse is None:
            inverse = np.linalg.inv(matrix)
        inverse = np.array(inverse, dtype=float)
        matrix.setflags(write=False)
        inverse.setflags(write=False)
        self.matrix = matrix
        self.inverse = inverse
        self.word = word

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.eye(dim), '')

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __mul__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return GroupElement(self.matrix @ other.matrix, other.inverse @ self.inverse,
                            reduce_word(self.word + other.word))

    def __invert__(self):
        return self.inv()

    def inv(self):
        return GroupElement(self.inverse, self.matrix, invert_word(self.word))

    def power(self, exponent):
        """ self ** exponent by repeated squaring; negative exponents allowed """
        base = self if exponent >= 0 else self.inv()
        result = GroupElement.identity(self.dim)
        exponent = abs(int(exponent))
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result
    __pow__ = power

    def conjugate(self, other):
        """ other * self * other^-1 """
        return other * self * other.inv()

    def act(self, vectors):
        return self.matrix @ np.asarray(vectors, dtype=float)

    @cached_property
    def cartan(self):
        return cartan_projection(self)

    @cached_property
    def jordan(self):
        return jordan_projection(self)

    @cached_property
    def decomposition(self):
        return cartan_decomposition(self)

    @cached_property
    def determinant(self):
        return float(np.linalg.det(self.matrix))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return '<GroupElement %s d=%d>' % (repr(self.word or 'e'), self.dim)


def as_element(g):
    """ Accept a GroupElement, or a matrix which is wrapped with its inverse """
    if isinstance(g, GroupElement):
        return g
    return GroupElement(g)
