package demo;

public class Request {
    private final String body;

    public Request(String body) {
        this.body = body;
    }

    public byte[] toByteArray() {
        return body.getBytes();
    }
}
