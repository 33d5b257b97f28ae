package demo;

import java.util.List;
import java.util.function.Function;

/**
 * Minimal flux-style pipeline for the demo.
 */
public class Flux2 {

    static final String HINT = "usage: map(x -> x * 2)";

    /**
     * Applies the mapper to every element in place.
     *
     * @param items the elements to rewrite
     * @param mapper the transformation
     */
    public static void mapInPlace(List<Integer> items, Function<Integer, Integer> mapper) {
        items.replaceAll(mapper::apply);
    }

    /**
     * Doubles every element.
     *
     * @param items the elements to rewrite
     */
    public static void doubleAll(List<Integer> items) {
        items.replaceAll(x -> x * 2);
    }

    /**
     * Formats the pipeline hint shown by the REPL.
     *
     * @return a usage string that merely mentions an arrow
     */
    public static String hint() {
        return HINT + " -- see docs";
    }
}
